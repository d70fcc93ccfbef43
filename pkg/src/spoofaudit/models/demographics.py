import enum


class Label(str, enum.Enum):
    BONAFIDE = "bonafide"
    SPOOF = "spoof"


class Gender(str, enum.Enum):
    MALE = "male"
    FEMALE = "female"
    OTHER = "other"
    UNKNOWN = "unknown"


class AgeGroup(str, enum.Enum):
    TEENS = "teens"
    TWENTIES = "20s"
    THIRTIES = "30s"
    FORTIES = "40s"
    FIFTIES = "50s"
    SIXTIES = "60s"
    SEVENTIES = "70s"
    EIGHTIES = "80s"
    NINETIES = "90s"
    UNKNOWN = "unknown"


class Accent(str, enum.Enum):
    US = "US"
    CA = "CA"
    UK = "UK"
    AU = "AU"
    SA = "SA"
    OTHER = "other"
    UNKNOWN = "unknown"


class Fluency(str, enum.Enum):
    FLUENT = "fluent"
    STUTTERING = "stuttering"
    UNKNOWN = "unknown"


class Orientation(str, enum.Enum):
    HIGHER_SYNTHETIC = "higher_synthetic"
    HIGHER_BONAFIDE = "higher_bonafide"


# Attributes a study may fix, group by, or vary
DEMOGRAPHIC_ATTRIBUTES = ("gender", "age_group", "accent", "fluency")
