from ccnx_migrate.store.content_store import ContentStore as ContentStore
from ccnx_migrate.store.content_store import DedupStats as DedupStats
from ccnx_migrate.store.content_store import StoreEntry as StoreEntry
