#pragma once

#include <stdexcept>
#include <string>

namespace evosts {

/// Exit-code class of an error, as reported by the CLI:
/// 1 = configuration error, 2 = I/O error, 3 = numeric failure.
enum class ErrorClass { config = 1, io = 2, numeric = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const std::string& msg) : std::runtime_error(msg), class_(cls) {}
    ErrorClass error_class() const noexcept { return class_; }

private:
    ErrorClass class_;
};

#define EVOSTS_ERROR_TYPE(NAME, CLASS)                                        \
    class NAME : public Error {                                               \
    public:                                                                   \
        explicit NAME(const std::string& msg) : Error(ErrorClass::CLASS, msg) {} \
    }

// configuration / precondition violations
EVOSTS_ERROR_TYPE(InvalidConfigError, config);
EVOSTS_ERROR_TYPE(InvalidLengthError, config);
EVOSTS_ERROR_TYPE(SignalTooShortError, config);
EVOSTS_ERROR_TYPE(TooFewPairsError, config);
EVOSTS_ERROR_TYPE(DimensionMismatchError, config);
EVOSTS_ERROR_TYPE(EmptyDatasetError, config);
EVOSTS_ERROR_TYPE(EmptyPartitionError, config);
EVOSTS_ERROR_TYPE(EmptyTrainingSetError, config);
EVOSTS_ERROR_TYPE(EmptyInputError, config);

// I/O and input-format failures
EVOSTS_ERROR_TYPE(FileNotFoundError, io);
EVOSTS_ERROR_TYPE(ParseError, io);
EVOSTS_ERROR_TYPE(EmptySignalError, io);
EVOSTS_ERROR_TYPE(OddByteCountError, io);
EVOSTS_ERROR_TYPE(IoError, io);

// numeric failures
EVOSTS_ERROR_TYPE(ZeroVarianceError, numeric);
EVOSTS_ERROR_TYPE(NonFiniteInputError, numeric);
EVOSTS_ERROR_TYPE(DegenerateDictionaryError, numeric);
EVOSTS_ERROR_TYPE(CacheMismatchError, numeric);

#undef EVOSTS_ERROR_TYPE

} // namespace evosts
