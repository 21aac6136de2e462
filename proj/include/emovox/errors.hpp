#ifndef EMOVOX_ERRORS_HPP
#define EMOVOX_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace emovox {

// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class UnsupportedFormatError : public Error {
public:
    using Error::Error;
};

class TooShortError : public Error {
public:
    using Error::Error;
};

class DegenerateSpectrumError : public Error {
public:
    using Error::Error;
};

class NoVoicedFramesError : public Error {
public:
    using Error::Error;
};

class TooFewSamplesError : public Error {
public:
    using Error::Error;
};

class NotConvergedError : public Error {
public:
    NotConvergedError(const std::string& msg, int iterations, double max_violation)
        : Error(msg), iterations(iterations), max_violation(max_violation) {}
    int iterations = 0;
    double max_violation = 0.0;
};

class DimensionMismatchError : public Error {
public:
    using Error::Error;
};

class MissingClassError : public Error {
public:
    using Error::Error;
};

class TooFewSpeakersError : public Error {
public:
    using Error::Error;
};

class EmptyInputError : public Error {
public:
    using Error::Error;
};

class LengthMismatchError : public Error {
public:
    using Error::Error;
};

} // namespace emovox

#endif
