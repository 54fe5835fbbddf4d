#pragma once

#include <stdexcept>
#include <string>

namespace autogbm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define AUTOGBM_ERROR_TYPE(Name)                   \
    class Name : public Error {                    \
    public:                                        \
        using Error::Error;                        \
    }

AUTOGBM_ERROR_TYPE(SchemaError);
AUTOGBM_ERROR_TYPE(ParseError);
AUTOGBM_ERROR_TYPE(OrderingError);
AUTOGBM_ERROR_TYPE(ValidationError);
AUTOGBM_ERROR_TYPE(ArgumentError);
AUTOGBM_ERROR_TYPE(ExtractionError);
AUTOGBM_ERROR_TYPE(NumericError);
AUTOGBM_ERROR_TYPE(FitError);
AUTOGBM_ERROR_TYPE(InferenceError);
AUTOGBM_ERROR_TYPE(StateError);
AUTOGBM_ERROR_TYPE(OptimizationError);
AUTOGBM_ERROR_TYPE(StratificationError);
AUTOGBM_ERROR_TYPE(ResamplingError);
AUTOGBM_ERROR_TYPE(MetricError);
AUTOGBM_ERROR_TYPE(PlanError);
AUTOGBM_ERROR_TYPE(ConfigError);
AUTOGBM_ERROR_TYPE(IoError);

#undef AUTOGBM_ERROR_TYPE

}  // namespace autogbm
