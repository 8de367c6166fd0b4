#pragma once

#include <stdexcept>
#include <string>

namespace okin {

// Base class for every error raised by the toolkit.  Catching okin::Error is
// enough to intercept anything thrown below; the concrete subclasses exist so
// callers (and tests) can react to specific failure modes.  kind() names the
// concrete class for diagnostics (CLI messages, manifests).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
    virtual const char* kind() const noexcept { return "Error"; }
};

// Document-level problems: malformed JSON, unknown keys, missing fields,
// values of the wrong JSON type.
class SchemaError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "SchemaError"; }
};

// Structurally valid document whose values violate a model invariant
// (negative mass, unbalanced atoms, stoichiometry of unsupported order, ...).
class ValidationError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "ValidationError"; }
};

// Operation applied to the wrong kind of model (e.g. a unary-chain helper on
// a model with binary reactions).
class ModelKindError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "ModelKindError"; }
};

// Numeric input outside an operation's domain (non-positive concentration
// where a logarithm is taken, empty particle set, ...).
class DomainError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "DomainError"; }
};

// A stochastic run exceeded its event budget before reaching t_end.
class EventBudgetExceeded : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "EventBudgetExceeded"; }
};

// Deterministic integration diverged (norm blow-up / non-finite state).
class BlowupError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "BlowupError"; }
};

// Delay-equation step size exceeds the smallest positive delay.
class StepSizeError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "StepSizeError"; }
};

// Delay-equation history was not supplied for every compartment.
class HistoryMissing : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "HistoryMissing"; }
};

// Mean-field network requested with random (non-constant) transport delays.
class NonConstantDelay : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "NonConstantDelay"; }
};

// Rate matrix does not describe a single communicating class.
class ReducibleChain : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "ReducibleChain"; }
};

// Newton solve stalled: no iterate reached the residual target.
class NoConvergence : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "NoConvergence"; }
};

// Jacobian at the located fixed point is numerically singular, which signals
// a continuum (ray) of fixed points rather than an isolated one.
class DegenerateJacobianError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "DegenerateJacobianError"; }
};

// Requested closed form has no positive solution for these parameters.
class NoPositiveFixedPoint : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "NoPositiveFixedPoint"; }
};

// Concentration vector with a negative entry passed to a deterministic map.
class NegativeConcentrationError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "NegativeConcentrationError"; }
};

}  // namespace okin
