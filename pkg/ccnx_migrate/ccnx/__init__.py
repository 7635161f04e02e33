from ccnx_migrate.ccnx.name import Name as Name
from ccnx_migrate.ccnx.name import ROOT as ROOT
from ccnx_migrate.ccnx.name import name_parse as name_parse
from ccnx_migrate.ccnx.name import name_to_text as name_to_text
from ccnx_migrate.ccnx.packet import ContentObject as ContentObject
from ccnx_migrate.ccnx.packet import Hash256 as Hash256
from ccnx_migrate.ccnx.packet import Interest as Interest
from ccnx_migrate.ccnx.packet import NamedAddress as NamedAddress
from ccnx_migrate.ccnx.packet import compute_object_hash as compute_object_hash
from ccnx_migrate.ccnx.packet import decode_content_object as decode_content_object
from ccnx_migrate.ccnx.packet import decode_interest as decode_interest
from ccnx_migrate.ccnx.packet import encode_content_object as encode_content_object
from ccnx_migrate.ccnx.packet import encode_interest as encode_interest
from ccnx_migrate.ccnx.packet import interest_wire_size as interest_wire_size
from ccnx_migrate.ccnx.packet import match_restrictions as match_restrictions
from ccnx_migrate.ccnx.packet import object_wire_size as object_wire_size
