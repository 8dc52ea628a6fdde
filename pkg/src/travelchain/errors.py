"""Error types shared across the platform."""


class PlatformError(Exception):
    """Infrastructure-level failure carrying a machine-readable code."""

    def __init__(self, code: str, message: str = "", *, retryable: bool = False):
        super().__init__(f"{code}: {message}" if message else code)
        self.code = code
        self.message = message
        self.retryable = retryable


class ContractError(PlatformError):
    """Raised by chaincode; surfaces to the client with its code."""


# ledger
CHAIN_GAP = "CHAIN_GAP"
HASH_MISMATCH = "HASH_MISMATCH"
BAD_ORDERER_SIG = "BAD_ORDERER_SIG"
CORRUPT_CHAIN = "CORRUPT_CHAIN"
ENCODE_UNSUPPORTED = "ENCODE_UNSUPPORTED"
DECODE_INVALID = "DECODE_INVALID"

# identity
WRONG_MSP = "WRONG_MSP"
POLICY_SYNTAX = "POLICY_SYNTAX"

# ordering
NOT_ADMIN = "NOT_ADMIN"
BAD_SIGNATURE = "BAD_SIGNATURE"
POLICY_DENIED = "POLICY_DENIED"
WRONG_CHANNEL = "WRONG_CHANNEL"
BUSY = "BUSY"
OUT_OF_RANGE = "OUT_OF_RANGE"

# chaincode
UNKNOWN_FUNCTION = "UNKNOWN_FUNCTION"
QUERY_WROTE = "QUERY_WROTE"
DENIED = "DENIED"
VALIDATION = "VALIDATION"
DUPLICATE_APPLICATION = "DUPLICATE_APPLICATION"
ALREADY_HAS_PASSPORT = "ALREADY_HAS_PASSPORT"
FORBIDDEN = "FORBIDDEN"
NOT_FOUND = "NOT_FOUND"
NO_PASSPORT = "NO_PASSPORT"
DUPLICATE_PENDING = "DUPLICATE_PENDING"
NOT_VERIFIED = "NOT_VERIFIED"
DUPLICATE_SUBJECT = "DUPLICATE_SUBJECT"

# peer
ALREADY_INSTALLED = "ALREADY_INSTALLED"
NO_CHAINCODE = "NO_CHAINCODE"
BAD_CALLER_CERT = "BAD_CALLER_CERT"

# gateway
SESSION_EXPIRED = "SESSION_EXPIRED"
FORBIDDEN_FUNCTION = "FORBIDDEN_FUNCTION"
LEDGER_UNAVAILABLE = "LEDGER_UNAVAILABLE"
PENDING_TIMEOUT = "PENDING_TIMEOUT"

# cli
DIR_NOT_EMPTY = "DIR_NOT_EMPTY"
TOPOLOGY_INVALID = "TOPOLOGY_INVALID"
