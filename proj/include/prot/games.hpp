#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "prot/game.hpp"
#include "prot/schedule.hpp"

namespace prot {

// Shape of the per-step loss pattern before scaling.
enum class GamePattern {
  random,    // i.i.d. uniform directions
  drift,     // random plus a per-expert bias, so one expert leads
  rotating,  // expert (t mod N) is spared, the rest pay: defeats follow-the-leader
};

std::string to_string(GamePattern pattern);
GamePattern pattern_from_string(const std::string& text);

// Unit-scale direction vector for step t: entries in [-1, 1] (or [0, 1] for
// nonnegative games) with max |entry| = 1.
std::vector<double> pattern_row(GamePattern pattern, std::size_t num_experts, std::size_t t,
                                LossMode mode, std::uint64_t seed);

// Game whose scaled fluctuation satisfies fluc(t) <= gamma(t) at every step:
// Delta v_t = u_t gamma(t) v_{t-1} / (1 - gamma(t)), u_t in [1/2, 1]. Needs v0 > 0.
LossMatrix fluc_bounded_game(std::size_t num_experts, std::size_t horizon,
                             const GammaSchedule& gamma, double v0, LossMode mode,
                             GamePattern pattern, std::uint64_t seed);

// Every step has max_i |s^i_t| = envelope(t) exactly.
LossMatrix envelope_game(std::size_t num_experts, std::size_t horizon,
                         const std::function<double(std::size_t)>& envelope, LossMode mode,
                         GamePattern pattern, std::uint64_t seed);

// The two-expert warm-up game: losses (1/2,0,1,0,1,...) and (0,1,0,1,0,...),
// multiplied by envelope(t).
LossMatrix alternating_game(std::size_t horizon,
                            const std::function<double(std::size_t)>& envelope);

}  // namespace prot
