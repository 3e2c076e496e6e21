#pragma once

#include <stdexcept>
#include <string>

namespace mv {

// Malformed instance data: dimension mismatch, duplicate points, bad multiplicities.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// The supports lie in a proper sublattice hyperplane: the mixed volume is 0.
struct RankDeficientLattice : InputError {
    explicit RankDeficientLattice(const std::string& what) : InputError(what) {}
};

// A floating-point tie where general position requires a strict comparison.
// The driver reacts by resampling the lifting.
struct GenericityFailure : std::runtime_error {
    explicit GenericityFailure(const std::string& what) : std::runtime_error(what) {}
};

struct SingularMatrix : GenericityFailure {
    explicit SingularMatrix(const std::string& what) : GenericityFailure(what) {}
};

struct IllConditioned : GenericityFailure {
    explicit IllConditioned(const std::string& what) : GenericityFailure(what) {}
};

struct SingularUpdate : GenericityFailure {
    explicit SingularUpdate(const std::string& what) : GenericityFailure(what) {}
};

struct DegenerateCell : GenericityFailure {
    explicit DegenerateCell(const std::string& what) : GenericityFailure(what) {}
};

// Two distinct active-label lists produced the same hash key.
struct HashCollision : std::runtime_error {
    explicit HashCollision(const std::string& what) : std::runtime_error(what) {}
};

struct InstanceTooLarge : std::runtime_error {
    explicit InstanceTooLarge(const std::string& what) : std::runtime_error(what) {}
};

struct VerificationFailure : std::runtime_error {
    explicit VerificationFailure(const std::string& what) : std::runtime_error(what) {}
};

struct TransportError : std::runtime_error {
    explicit TransportError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace mv
