"""Exception hierarchy. Each error carries a stable machine-readable code."""


class EKGError(Exception):
    code = "ERROR"


class IngestError(EKGError):
    code = "INGEST_ERROR"


class SamplingError(EKGError):
    code = "SAMPLING_ERROR"


class UnknownFeatureError(EKGError):
    code = "UNKNOWN_FEATURE"


class RelationError(EKGError):
    code = "RELATION_ERROR"


class PosetError(EKGError):
    code = "POSET_ERROR"


class OracleLimitError(EKGError):
    code = "ORACLE_LIMIT"


class ScoringError(EKGError):
    code = "SCORING_ERROR"


class SearchError(EKGError):
    code = "SEARCH_ERROR"


class ConfigError(EKGError):
    code = "CONFIG_ERROR"
