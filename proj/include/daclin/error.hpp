#pragma once

#include <stdexcept>
#include <string>

namespace daclin {

// Base for every library failure. The CLI maps subclasses onto exit codes:
// configuration-type errors exit 2, numerical failures exit 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

// Filter design outside the realizable region (cutoff at or above Nyquist).
class DesignError : public Error {
public:
    using Error::Error;
};

// Rank-deficient or otherwise unsolvable regression.
class FitError : public Error {
public:
    using Error::Error;
};

class TrainingError : public Error {
public:
    TrainingError(const std::string& what, int epoch) : Error(what), epoch_(epoch) {}
    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

// A two-tone plan whose tone bins collide with an intermodulation bin.
class AmbiguityError : public Error {
public:
    using Error::Error;
};

} // namespace daclin
