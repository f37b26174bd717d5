#pragma once

#include <cmath>
#include <stdexcept>
#include <variant>
#include <vector>

namespace mfg {

// Uniform discretization of [0, T] with N steps, N+1 nodes.
struct TimeGrid {
    double horizon = 1.0;
    int n_steps = 1;

    TimeGrid() = default;
    TimeGrid(double T, int n) : horizon(T), n_steps(n) {
        if (!(T > 0.0)) throw std::invalid_argument("TimeGrid: horizon must be positive");
        if (n < 1) throw std::invalid_argument("TimeGrid: n_steps must be >= 1");
    }

    double dt() const { return horizon / n_steps; }
    int n_nodes() const { return n_steps + 1; }
    double node(int k) const { return horizon * k / n_steps; }

    bool operator==(const TimeGrid& o) const {
        return horizon == o.horizon && n_steps == o.n_steps;
    }
};

// Deterministic time-varying coefficient: either a constant or values
// tabulated on a uniform grid over [0, T], linearly interpolated.
class Coefficient {
public:
    Coefficient() : data_(0.0) {}
    Coefficient(double v) : data_(v) {}  // implicit on purpose: specs read naturally

    static Coefficient constant(double v) { return Coefficient(v); }

    static Coefficient table(std::vector<double> values, double horizon) {
        if (values.size() < 2)
            throw std::invalid_argument("Coefficient::table: need at least 2 values");
        Coefficient c;
        c.data_ = Table{std::move(values), horizon};
        return c;
    }

    bool is_constant() const { return std::holds_alternative<double>(data_); }

    double operator()(double t) const {
        if (const double* v = std::get_if<double>(&data_)) return *v;
        const Table& tab = std::get<Table>(data_);
        const int n = static_cast<int>(tab.values.size()) - 1;
        double s = t / tab.horizon * n;
        if (s <= 0.0) return tab.values.front();
        if (s >= n) return tab.values.back();
        int k = static_cast<int>(s);
        double w = s - k;
        return (1.0 - w) * tab.values[k] + w * tab.values[k + 1];
    }

private:
    struct Table {
        std::vector<double> values;  // length N+1, uniform over [0, horizon]
        double horizon;
    };
    std::variant<double, Table> data_;
};

// Node values plus node derivatives of a smooth function of t; cubic Hermite
// interpolation between nodes keeps dense evaluation at the accuracy of a
// 4th-order solve.
struct Curve {
    std::vector<double> y;   // length N+1
    std::vector<double> dy;  // length N+1

    double eval(const TimeGrid& grid, double t) const {
        const int n = grid.n_steps;
        double s = t / grid.horizon * n;
        if (s <= 0.0) return y.front();
        if (s >= n) return y.back();
        int k = static_cast<int>(s);
        double u = s - k;
        double h = grid.dt();
        double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
        double h10 = u * (1 - u) * (1 - u);
        double h01 = u * u * (3 - 2 * u);
        double h11 = u * u * (u - 1);
        return h00 * y[k] + h10 * h * dy[k] + h01 * y[k + 1] + h11 * h * dy[k + 1];
    }
};

}  // namespace mfg
