#include "rps/game.hpp"
#include "rps/errors.hpp"
#include "rps/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rps {

GameOutcome play_round(int choice_a, int choice_b, double h) {
    if (choice_a < 0 || choice_a > 2 || choice_b < 0 || choice_b > 2)
        throw std::invalid_argument("play_round: choices must be in {0,1,2}");
    if (!(h > 0.0))
        throw std::invalid_argument("play_round: h must be positive");
    if (choice_a == choice_b) return {0.0, 0.0};
    // a beats b when b is the next choice in the cycle.
    if ((choice_b - choice_a + 3) % 3 == 1) return {h, -h};
    return {-h, h};
}

AgentPopulation::AgentPopulation(std::vector<double> initial_wealths, double total_mass, double stake)
    : base_(std::move(initial_wealths)), stake_(stake) {
    if (base_.size() < 2)
        throw std::invalid_argument("AgentPopulation: need at least 2 agents");
    if (!(stake_ > 0.0))
        throw std::invalid_argument("AgentPopulation: stake must be positive");
    if (!(total_mass > 0.0))
        throw std::invalid_argument("AgentPopulation: total mass must be positive");
    weight_ = total_mass / static_cast<double>(base_.size());
    net_wins_.assign(base_.size(), 0);
    stake_floor_.resize(base_.size());
    for (size_t i = 0; i < base_.size(); ++i) {
        if (!std::isfinite(base_[i]))
            throw std::invalid_argument("AgentPopulation: non-finite wealth");
        // smallest n with base + n*stake >= stake; nudged up until
        // base + (n-1)*stake >= 0 holds in floating point as well
        long long n = static_cast<long long>(std::ceil((stake_ - base_[i]) / stake_));
        while (base_[i] + static_cast<double>(n - 1) * stake_ < 0.0) ++n;
        while (n > std::numeric_limits<long long>::min() + 1 &&
               base_[i] + static_cast<double>(n - 1) * stake_ >= stake_) --n;
        stake_floor_[i] = n;
        base_sum_ += base_[i];
    }
}

AgentPopulation AgentPopulation::sample_uniform(int n_agents, double a, double b,
                                                double total_mass, double stake, uint64_t seed) {
    if (n_agents < 2)
        throw std::invalid_argument("sample_uniform: need at least 2 agents");
    std::vector<double> w(static_cast<size_t>(n_agents));
    const uint64_t s = rng::mix_seed(seed, 0x696e6974ull); // init stream
    for (int i = 0; i < n_agents; ++i)
        w[static_cast<size_t>(i)] = a + (b - a) * rng::to_unit(rng::draw(s, static_cast<uint64_t>(i), 0));
    return AgentPopulation(std::move(w), total_mass, stake);
}

std::vector<double> AgentPopulation::wealths() const {
    std::vector<double> w(base_.size());
    for (size_t i = 0; i < base_.size(); ++i)
        w[i] = wealth(static_cast<int>(i));
    return w;
}

double AgentPopulation::total_wealth() const {
    return base_sum_ + stake_ * static_cast<double>(total_net_wins());
}

long long AgentPopulation::total_net_wins() const {
    long long s = 0;
    for (long long n : net_wins_) s += n;
    return s;
}

double AgentPopulation::min_wealth() const {
    double m = wealth(0);
    for (int i = 1; i < size(); ++i) m = std::min(m, wealth(i));
    return m;
}

void AgentPopulation::apply_game(int winner, int loser) {
    ++net_wins_[static_cast<size_t>(winner)];
    --net_wins_[static_cast<size_t>(loser)];
}

AgentPopulation step_population(const AgentPopulation& pop, const ModelParams& params,
                                double dt, uint64_t seed) {
    const int n = pop.size();
    if (n < 2)
        throw std::invalid_argument("step_population: need at least 2 agents");
    if (params.h != pop.stake())
        throw std::invalid_argument("step_population: params.h does not match the population stake");
    const double rate = params.eta * params.rho * dt;
    if (!(rate > 0.0) || rate > 0.1 + 1e-12)
        throw NumericalError("step_population: eta*rho*dt must be in (0, 0.1] for thinning validity");

    AgentPopulation out = pop;
    // Each initiated game also moves the opponent, so initiating at rate
    // eta*rho/2 yields the per-agent participation rate eta*rho.
    const double p_init = 0.5 * rate;
    for (int a = 0; a < n; ++a) {
        const uint64_t ua = static_cast<uint64_t>(a);
        if (rng::to_unit(rng::draw(seed, ua, 0)) >= p_init) continue;
        int b = static_cast<int>(rng::bounded(rng::draw(seed, ua, 1), static_cast<uint64_t>(n - 1)));
        if (b >= a) ++b;
        if (params.constrained && !(out.can_stake(a) && out.can_stake(b)))
            continue; // game aborts: one of the players cannot stake the wager
        const int ca = static_cast<int>(rng::bounded(rng::draw(seed, ua, 2), 3));
        const int cb = static_cast<int>(rng::bounded(rng::draw(seed, ua, 3), 3));
        if (ca == cb) continue;
        if ((cb - ca + 3) % 3 == 1)
            out.apply_game(a, b);
        else
            out.apply_game(b, a);
    }
    out.time = pop.time + dt;
    return out;
}

DensityField histogram(const AgentPopulation& pop, const Grid1D& grid) {
    DensityField f = zero_field(grid);
    const double w = pop.agent_weight() / grid.dx;
    for (int i = 0; i < pop.size(); ++i) {
        const double x = pop.wealth(i);
        const int c = static_cast<int>(std::floor((x - grid.x_min) / grid.dx));
        if (c < 0 || c >= grid.n_cells)
            throw std::invalid_argument("histogram: wealth " + std::to_string(x) + " outside grid");
        f.values[static_cast<size_t>(c)] += w;
    }
    f.time = pop.time;
    return f;
}

} // namespace rps
