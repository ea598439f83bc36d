from .errors import (IBVCError, MalformedInputError, ConfigurationError, ContractError,
                     DecodeError, EvaluationError, TrainingAbort)
from .frame import Frame, CodingType
