#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace sragan {

/// An operation received tensors or values that violate its contract.
class ArgumentError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// The run configuration is unusable: bad key/value, missing folder, empty dataset.
class ConfigurationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A pluggable backend could not be brought up (e.g. weights file missing).
class InitializationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Training must stop: non-finite loss or unwritable run artifacts.
class TrainingAbortError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require_arg(bool ok, const std::string& msg) {
  if (!ok) throw ArgumentError(msg);
}

/// Derives an independent stream seed from a master seed and a stream tag.
uint64_t derive_seed(uint64_t master, uint64_t stream);

/// Unbiased draw from [0, n). Portable across standard libraries, unlike
/// std::uniform_int_distribution.
size_t uniform_index(std::mt19937_64& rng, size_t n);

// Exact engine-state round trip, used by checkpointing.
std::string rng_to_string(const std::mt19937_64& rng);
std::mt19937_64 rng_from_string(const std::string& text);

}  // namespace sragan
