# Copyright Sierra

from ccnx_migrate.manifest.build import DEFAULT_CHUNK_LIMIT as DEFAULT_CHUNK_LIMIT
from ccnx_migrate.manifest.build import apply_entry as apply_entry
from ccnx_migrate.manifest.build import build_manifest as build_manifest
from ccnx_migrate.manifest.build import checkpoint_base as checkpoint_base
from ccnx_migrate.manifest.build import chunk_name as chunk_name
from ccnx_migrate.manifest.build import entry_fetch_address as entry_fetch_address
from ccnx_migrate.manifest.build import format_manifest as format_manifest
from ccnx_migrate.manifest.build import manifest_name as manifest_name
from ccnx_migrate.manifest.codec import parse_manifest as parse_manifest
from ccnx_migrate.manifest.codec import read_chunk_info as read_chunk_info
from ccnx_migrate.manifest.model import BuiltManifest as BuiltManifest
from ccnx_migrate.manifest.model import Manifest as Manifest
from ccnx_migrate.manifest.model import ManifestEntry as ManifestEntry
from ccnx_migrate.manifest.model import ManifestSection as ManifestSection
from ccnx_migrate.manifest.model import StrongHash as StrongHash
from ccnx_migrate.manifest.model import WeakName as WeakName
from ccnx_migrate.manifest.model import checkpoint_id as checkpoint_id
from ccnx_migrate.manifest.naming import naming_overhead as naming_overhead
