#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "snell/snell.hpp"
#include "snell/step_path.hpp"

namespace snell::testing {

// Random canonical step path on [0, 1] with up to max_jumps jumps; sometimes
// places the last jump exactly at the horizon to exercise the pinned case.
inline StepPath random_step_path(std::mt19937_64& rng, int max_jumps) {
    std::uniform_int_distribution<int> count_dist(0, max_jumps);
    std::uniform_real_distribution<double> t_dist(0.01, 0.99);
    std::uniform_real_distribution<double> v_dist(-2.0, 2.0);
    const int jumps = count_dist(rng);
    std::vector<double> times{0.0};
    for (int i = 0; i < jumps; ++i) times.push_back(t_dist(rng));
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    if (times.size() > 1 && std::uniform_real_distribution<double>(0.0, 1.0)(rng) < 0.15)
        times.back() = 1.0;
    std::vector<double> values;
    double prev = v_dist(rng);
    values.push_back(prev);
    for (std::size_t i = 1; i < times.size(); ++i) {
        double v = v_dist(rng);
        while (v == prev) v = v_dist(rng);
        values.push_back(v);
        prev = v;
    }
    return StepPath(times, values, 1.0);
}

// Bounded random payoff gamma(t, x) = a * tanh(b x + c t) + d.
inline Payoff random_payoff(std::mt19937_64& rng, int tag) {
    std::uniform_real_distribution<double> amp(0.5, 2.0);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    const double a = amp(rng), b = coef(rng), c = coef(rng), d = coef(rng);
    return Payoff("random" + std::to_string(tag),
                  [a, b, c, d](double t, double x) { return a * std::tanh(b * x + c * t) + d; },
                  a + std::abs(d) + 1e-9, "random bounded test payoff", 10.0, -10.0, 10.0);
}

}  // namespace snell::testing
