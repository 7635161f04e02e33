# Copyright Sierra

from ccnx_migrate.transport.handshake import CloseResponder as CloseResponder
from ccnx_migrate.transport.handshake import close_session as close_session
from ccnx_migrate.transport.handshake import model_check_close as model_check_close
from ccnx_migrate.transport.session import FetchSession as FetchSession
from ccnx_migrate.transport.session import SessionState as SessionState
from ccnx_migrate.transport.session import TransferCounters as TransferCounters
