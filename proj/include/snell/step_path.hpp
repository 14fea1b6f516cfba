#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace snell {

// Strictly increasing times in [0, T] starting at 0. Used both as the time
// axis of a scenario tree and as a stopping-time restriction grid.
class TimeGrid {
public:
    explicit TimeGrid(std::vector<double> points);

    const std::vector<double>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    double operator[](std::size_t i) const { return points_[i]; }
    double front() const { return points_.front(); }
    double back() const { return points_.back(); }

    // Largest gap between consecutive points (0 for a single point).
    double mesh() const;

    // Index of the point matching t within tol, if any.
    std::optional<std::size_t> index_of(double t, double tol) const;

    // True if every point of `other` matches one of ours within tol.
    bool contains(const TimeGrid& other, double tol) const;

private:
    std::vector<double> points_;
};

// A piecewise-constant cadlag trajectory on [0, horizon]. jump_times() is
// strictly increasing, starts at 0 and ends at or before the horizon;
// values() holds the value on [jump_times[i], jump_times[i+1]). Stored in
// canonical form: consecutive values always differ, so equality of paths is
// equality of the representation.
class StepPath {
public:
    StepPath(std::vector<double> jump_times, std::vector<double> values, double horizon);

    static StepPath constant(double value, double horizon);

    // Path sampled on a grid: value on [grid[i], grid[i+1]) is values[i];
    // zero-size jumps are dropped by canonicalization.
    static StepPath from_samples(const std::vector<double>& grid,
                                 const std::vector<double>& values, double horizon);

    double horizon() const { return horizon_; }
    const std::vector<double>& jump_times() const { return jump_times_; }
    const std::vector<double>& values() const { return values_; }
    // Number of actual discontinuities (the initial point at t=0 is not one).
    std::size_t jump_count() const { return jump_times_.size() - 1; }

    double eval(double t) const;
    double operator()(double t) const { return eval(t); }

    bool operator==(const StepPath& other) const = default;

private:
    std::vector<double> jump_times_;
    std::vector<double> values_;
    double horizon_;
};

// sup_t |a(t) - b(t)|; attained on the union of the jump sets.
double uniform_distance(const StepPath& a, const StepPath& b);

// Skorokhod J1 distance
//   inf over increasing continuous bijections l of [0,T] of
//     max( sup_t |l(t) - t| , sup_t |a(l(t)) - b(t)| ),
// computed exactly by dynamic programming over monotone matchings of the two
// jump sets. Candidate time changes are piecewise linear through matched jump
// pairs; a jump at exactly t = T cannot be moved (every admissible l fixes T),
// so such jumps match only with jumps at T.
double skorokhod_distance(const StepPath& a, const StepPath& b);

}  // namespace snell
