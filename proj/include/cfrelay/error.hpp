#pragma once

#include <stdexcept>
#include <string>

namespace cfrelay {

// Base of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Dimensions disagree: tensor lengths, distribution shapes, LP row widths.
class ShapeError : public Error {
public:
    using Error::Error;
};

// A distribution or kernel slice does not sum to one (or has a negative entry).
class StochasticityError : public Error {
public:
    StochasticityError(const std::string& what, std::size_t slice, double mass)
        : Error(what), slice_(slice), mass_(mass) {}

    std::size_t slice() const noexcept { return slice_; }
    double mass() const noexcept { return mass_; }

private:
    std::size_t slice_;
    double mass_;
};

// Shared, unknown or overlapping variables.
class VariableError : public Error {
public:
    using Error::Error;
};

class NormalizationError : public Error {
public:
    using Error::Error;
};

// Evaluator called on a network with the wrong number of relays.
class ArityError : public Error {
public:
    using Error::Error;
};

class SizeLimitError : public Error {
public:
    using Error::Error;
};

// Simplex lost precision; carries the tableau diagnostic in the message.
class NumericalFailure : public Error {
public:
    NumericalFailure(const std::string& what, double condition)
        : Error(what), condition_(condition) {}

    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

// Malformed input document (bad key, wrong type).
class InputError : public Error {
public:
    using Error::Error;
};

} // namespace cfrelay
