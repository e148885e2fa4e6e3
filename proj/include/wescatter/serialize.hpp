/**
 * Binary snapshots of learners and ensembles.  The layout is explicit
 * little-endian ("WSN1" magic, format version, kind tag) so files move
 * between hosts; doubles travel as their IEEE bit patterns, keeping
 * round-trips exact.  Decoding trusts nothing: every read is bounds-checked
 * and structural nonsense surfaces as DecodeError.
 */
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "wescatter/ensemble.hpp"

namespace wsn {

struct DecodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::uint8_t> serialize_model(const BaseLearner& learner);
BaseLearner deserialize_model(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> serialize_ensemble(const Ensemble& ens);
Ensemble deserialize_ensemble(const std::vector<std::uint8_t>& bytes);

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> read_file(const std::string& path);

}  // namespace wsn
