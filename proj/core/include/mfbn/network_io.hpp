#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "mfbn/network.hpp"

namespace mfbn {

/// JSON network document:
///
///   {
///     "n_units": 3,
///     "activation": "sigmoid" | "noisy_or",
///     "biases": [h1, h2, h3],
///     "edges": [{"i": 2, "j": 1, "w": 0.5}, ...],   // 1-based, j < i
///     "visible": [3]
///   }
///
/// Unknown keys are rejected. Doubles are written in shortest round-trip form.
std::string serialize(const BeliefNetwork& net);

/// Throws ParseError (with field context) for malformed documents and
/// ValidationError for documents describing an invalid network.
BeliefNetwork parse_network(std::string_view text);

BeliefNetwork load_network(const std::filesystem::path& path);
void save_network(const BeliefNetwork& net, const std::filesystem::path& path);

}  // namespace mfbn
