#pragma once

#include "rps/grid.hpp"

#include <cstdint>
#include <vector>

namespace rps {

/// Payoff of one game, as seen by player a. Zero-sum: delta_b = -delta_a.
struct GameOutcome {
    double delta_a = 0.0;
    double delta_b = 0.0;
};

/// Payoff table of the three-choice cyclic game: choice c beats choice
/// (c+1) mod 3, equal choices draw.
GameOutcome play_round(int choice_a, int choice_b, double h);

/// Weighted particle ensemble. Each agent's wealth is stored as
/// base + net_wins * stake, with an integer win counter, so the total wealth
/// sum(base) + stake * sum(net_wins) is conserved bit-exactly under the
/// zero-sum games (sum(net_wins) stays 0 as an integer).
class AgentPopulation {
public:
    AgentPopulation(std::vector<double> initial_wealths, double total_mass, double stake);

    /// N agents with wealths drawn uniformly from [a, b); total_mass = rho.
    static AgentPopulation sample_uniform(int n_agents, double a, double b,
                                          double total_mass, double stake, uint64_t seed);

    int size() const { return static_cast<int>(base_.size()); }
    double stake() const { return stake_; }
    double agent_weight() const { return weight_; }
    double time = 0.0;

    double wealth(int i) const { return base_[static_cast<size_t>(i)] + static_cast<double>(net_wins_[static_cast<size_t>(i)]) * stake_; }
    std::vector<double> wealths() const;
    long long net_wins(int i) const { return net_wins_[static_cast<size_t>(i)]; }

    /// sum(base) + stake * sum(net_wins); bit-stable across steps.
    double total_wealth() const;
    long long total_net_wins() const;

    double min_wealth() const;

    /// True when the agent holds at least one stake (integer comparison
    /// against a precomputed per-agent threshold, so a loser can never be
    /// driven below zero).
    bool can_stake(int i) const { return net_wins_[static_cast<size_t>(i)] >= stake_floor_[static_cast<size_t>(i)]; }

    void apply_game(int winner, int loser);

private:
    std::vector<double> base_;
    std::vector<long long> net_wins_;
    std::vector<long long> stake_floor_;
    double stake_ = 1.0;
    double weight_ = 1.0;
    double base_sum_ = 0.0;
};

/// One thinned step of the pair-game process. Each agent initiates a game with
/// probability eta*rho*dt/2 against a uniformly random other agent, so the
/// per-agent game participation rate is eta*rho and each of the +h / -h / draw
/// outcomes occurs at per-agent rate eta*rho/3. In constrained mode a game
/// aborts unless both participants can stake h. Deterministic in
/// (pop, params, dt, seed); agents are processed in index order.
AgentPopulation step_population(const AgentPopulation& pop, const ModelParams& params,
                                double dt, uint64_t seed);

/// Empirical density: cell value = count * agent_weight / dx. Throws if any
/// wealth lies outside the grid.
DensityField histogram(const AgentPopulation& pop, const Grid1D& grid);

} // namespace rps
