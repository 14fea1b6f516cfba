#include "snell/step_path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace snell {

TimeGrid::TimeGrid(std::vector<double> points) : points_(std::move(points)) {
    if (points_.empty()) throw std::invalid_argument("TimeGrid: no points");
    if (points_.front() != 0.0) throw std::invalid_argument("TimeGrid: first point must be 0");
    for (std::size_t i = 1; i < points_.size(); ++i) {
        if (!(points_[i] > points_[i - 1]))
            throw std::invalid_argument("TimeGrid: points must be strictly increasing");
    }
}

double TimeGrid::mesh() const {
    double m = 0.0;
    for (std::size_t i = 1; i < points_.size(); ++i) m = std::max(m, points_[i] - points_[i - 1]);
    return m;
}

std::optional<std::size_t> TimeGrid::index_of(double t, double tol) const {
    auto it = std::lower_bound(points_.begin(), points_.end(), t - tol);
    if (it != points_.end() && std::abs(*it - t) <= tol)
        return static_cast<std::size_t>(it - points_.begin());
    return std::nullopt;
}

bool TimeGrid::contains(const TimeGrid& other, double tol) const {
    for (double t : other.points())
        if (!index_of(t, tol)) return false;
    return true;
}

StepPath::StepPath(std::vector<double> jump_times, std::vector<double> values, double horizon)
    : horizon_(horizon) {
    if (!(horizon > 0.0)) throw std::invalid_argument("StepPath: horizon must be positive");
    if (jump_times.empty() || jump_times.size() != values.size())
        throw std::invalid_argument("StepPath: times and values must be non-empty and equal length");
    if (jump_times.front() != 0.0) throw std::invalid_argument("StepPath: first jump time must be 0");
    for (std::size_t i = 1; i < jump_times.size(); ++i) {
        if (!(jump_times[i] > jump_times[i - 1]))
            throw std::invalid_argument("StepPath: jump times must be strictly increasing");
    }
    if (jump_times.back() > horizon)
        throw std::invalid_argument("StepPath: jump times must not exceed the horizon");
    // Canonical form: drop zero-size jumps.
    jump_times_.push_back(jump_times[0]);
    values_.push_back(values[0]);
    for (std::size_t i = 1; i < jump_times.size(); ++i) {
        if (values[i] != values_.back()) {
            jump_times_.push_back(jump_times[i]);
            values_.push_back(values[i]);
        }
    }
}

StepPath StepPath::constant(double value, double horizon) {
    return StepPath({0.0}, {value}, horizon);
}

StepPath StepPath::from_samples(const std::vector<double>& grid,
                                const std::vector<double>& values, double horizon) {
    return StepPath(grid, values, horizon);
}

double StepPath::eval(double t) const {
    if (t < 0.0 || t > horizon_)
        throw std::invalid_argument("StepPath::eval: time outside [0, horizon]");
    auto it = std::upper_bound(jump_times_.begin(), jump_times_.end(), t);
    return values_[static_cast<std::size_t>(it - jump_times_.begin()) - 1];
}

double uniform_distance(const StepPath& a, const StepPath& b) {
    if (a.horizon() != b.horizon())
        throw std::invalid_argument("uniform_distance: horizon mismatch");
    double d = 0.0;
    for (double t : a.jump_times()) d = std::max(d, std::abs(a.eval(t) - b.eval(t)));
    for (double t : b.jump_times()) d = std::max(d, std::abs(a.eval(t) - b.eval(t)));
    return d;
}

namespace {

// Cost model shared by the DP below and by brute-force verification: a
// monotone lattice path from (0,0) to (p,q) over the segment sequences of a
// and b.  Entering state (i,j) realizes the pair (A_i, B_j) at at least one
// time point, contributing |A_i - B_j|.  Steps:
//   diagonal: jump i of a aligned with jump j of b at time v_j, cost |u_i - v_j|;
//   right:    jump i of a placed inside b's current constancy interval, cost =
//             distance from u_i to that closed interval;
//   up:       jump of b occurs, no time cost.
// A jump at exactly t = T is fixed by every admissible time change, hence it
// can only align with a jump at T or stand unmatched at T itself.
struct J1Costs {
    const std::vector<double>& av;  // segment values of a (size p+1)
    const std::vector<double>& bv;  // segment values of b (size q+1)
    const std::vector<double>& au;  // jump times of a (size p, excludes t=0)
    const std::vector<double>& bu;  // jump times of b (size q)
    double horizon;

    std::size_t p() const { return au.size(); }
    std::size_t q() const { return bu.size(); }

    double value_cost(std::size_t i, std::size_t j) const { return std::abs(av[i] - bv[j]); }

    double diag_cost(std::size_t i, std::size_t j) const {
        const double u = au[i - 1], v = bu[j - 1];
        if ((u == horizon) != (v == horizon)) return std::numeric_limits<double>::infinity();
        return std::abs(u - v);
    }

    // Cost of placing a's jump i while b sits in segment j.
    double right_cost(std::size_t i, std::size_t j) const {
        const double inf = std::numeric_limits<double>::infinity();
        const double u = au[i - 1];
        const double lo = (j == 0) ? 0.0 : bu[j - 1];
        const double hi = (j == q()) ? horizon : bu[j];
        if (j == q() && !bu.empty() && bu.back() == horizon) return inf;  // interval is {T}, occupied
        if (u == horizon) return (j == q()) ? 0.0 : inf;                  // pinned at T
        if (u < lo) return lo - u;
        if (u > hi) return u - hi;
        return 0.0;
    }
};

}  // namespace

double skorokhod_distance(const StepPath& a, const StepPath& b) {
    if (a.horizon() != b.horizon())
        throw std::invalid_argument("skorokhod_distance: horizon mismatch");
    std::vector<double> au(a.jump_times().begin() + 1, a.jump_times().end());
    std::vector<double> bu(b.jump_times().begin() + 1, b.jump_times().end());
    J1Costs c{a.values(), b.values(), au, bu, a.horizon()};
    const std::size_t p = c.p(), q = c.q();

    std::vector<std::vector<double>> dp(p + 1, std::vector<double>(q + 1));
    for (std::size_t i = 0; i <= p; ++i) {
        for (std::size_t j = 0; j <= q; ++j) {
            double best;
            if (i == 0 && j == 0) {
                best = 0.0;
            } else {
                best = std::numeric_limits<double>::infinity();
                if (i > 0) best = std::min(best, std::max(dp[i - 1][j], c.right_cost(i, j)));
                if (j > 0) best = std::min(best, dp[i][j - 1]);
                if (i > 0 && j > 0)
                    best = std::min(best, std::max(dp[i - 1][j - 1], c.diag_cost(i, j)));
            }
            dp[i][j] = std::max(best, c.value_cost(i, j));
        }
    }
    return dp[p][q];
}

}  // namespace snell
