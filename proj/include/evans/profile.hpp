#pragma once

// Sampled wave profiles: JSON ingestion and rational barycentric
// interpolation on the stored grid.

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "evans/linalg.hpp"

namespace evans {

/// Profile u(x, y_c) stored as one row per component (y-grid point) over a
/// strictly increasing x-grid.
///
/// Interpolation is Floater-Hormann rational (blend degree `blend`), which
/// stays well conditioned on equispaced grids where global polynomial
/// interpolation through thousands of points would not.
class SampledProfile {
public:
    SampledProfile() = default;

    SampledProfile(RealVector grid, RealMatrix values, int y_modes = 0, std::string description = {}, int blend = 8)
        : grid_(std::move(grid)), values_(std::move(values)), y_modes_(y_modes), description_(std::move(description)) {
        validate();
        blend_ = std::min<int>(blend, static_cast<int>(grid_.size()) - 1);
        compute_weights();
    }

    const RealVector& grid() const { return grid_; }
    const RealMatrix& values() const { return values_; }
    Eigen::Index components() const { return values_.rows(); }
    int y_modes() const { return y_modes_; }
    const std::string& description() const { return description_; }
    double x_min() const { return grid_(0); }
    double x_max() const { return grid_(grid_.size() - 1); }

    /// Interpolated components at x.
    RealVector operator()(double x) const {
        RealVector out;
        evaluate(x, &out, nullptr);
        return out;
    }

    RealVector derivative(double x) const {
        RealVector d;
        evaluate(x, nullptr, &d);
        return d;
    }

    void evaluate(double x, RealVector* value, RealVector* deriv) const {
        check_range(x);
        const Eigen::Index m = grid_.size();
        for (Eigen::Index k = 0; k < m; ++k) {
            if (x == grid_(k)) {
                if (value) *value = values_.col(k);
                if (deriv) *deriv = node_derivative(k);
                return;
            }
        }
        // the derivative formula cancels as x -> node; within sqrt(eps) the
        // node value is more accurate than the formula
        if (deriv) {
            const double snap = 1.5e-8 * std::max(1.0, std::abs(x));
            for (Eigen::Index k = 0; k < m; ++k) {
                if (std::abs(x - grid_(k)) <= snap) {
                    *deriv = node_derivative(k);
                    deriv = nullptr;
                    break;
                }
            }
        }
        double den = 0.0;
        RealVector num = RealVector::Zero(components());
        for (Eigen::Index k = 0; k < m; ++k) {
            const double t = weights_(k) / (x - grid_(k));
            den += t;
            num += t * values_.col(k);
        }
        const RealVector r = num / den;
        if (value) *value = r;
        if (deriv) {
            RealVector acc = RealVector::Zero(components());
            for (Eigen::Index k = 0; k < m; ++k) {
                const double dx = x - grid_(k);
                acc += weights_(k) / (dx * dx) * (r - values_.col(k));
            }
            *deriv = acc / den;
        }
    }

private:
    void validate() const {
        if (grid_.size() < 2) throw IngestionError("profile: grid needs at least two points");
        if (values_.cols() != grid_.size()) {
            std::ostringstream os;
            os << "profile: components have " << values_.cols() << " samples but the grid has " << grid_.size();
            throw IngestionError(os.str());
        }
        if (values_.rows() < 1) throw IngestionError("profile: no components");
        for (Eigen::Index k = 0; k < grid_.size(); ++k) {
            if (!std::isfinite(grid_(k))) {
                throw IngestionError("profile: grid[" + std::to_string(k) + "] is not finite");
            }
            if (k > 0 && !(grid_(k) > grid_(k - 1))) {
                throw IngestionError("profile: grid is not strictly increasing at index " + std::to_string(k));
            }
        }
        for (Eigen::Index c = 0; c < values_.rows(); ++c)
            for (Eigen::Index k = 0; k < values_.cols(); ++k)
                if (!std::isfinite(values_(c, k))) {
                    throw IngestionError("profile: components[" + std::to_string(c) + "][" + std::to_string(k) +
                                         "] is not finite");
                }
        if (y_modes_ != 0 && y_modes_ != values_.rows()) {
            throw IngestionError("profile: y_modes = " + std::to_string(y_modes_) + " but " +
                                 std::to_string(values_.rows()) + " components are stored");
        }
    }

    void check_range(double x) const {
        const double slack = 1e-12 * std::max(1.0, x_max() - x_min());
        if (x < x_min() - slack || x > x_max() + slack) {
            std::ostringstream os;
            os << "profile: x = " << x << " lies outside the sampled range [" << x_min() << ", " << x_max() << "]";
            throw IngestionError(os.str());
        }
    }

    void compute_weights() {
        const auto m = static_cast<int>(grid_.size());
        const int n = m - 1;
        const int d = blend_;
        weights_ = RealVector::Zero(m);
        for (int k = 0; k <= n; ++k) {
            double s = 0.0;
            for (int i = std::max(0, k - d); i <= std::min(k, n - d); ++i) {
                // sum over the local interpolants containing node k
                double prod = 1.0;
                for (int j = i; j <= i + d; ++j)
                    if (j != k) prod /= std::abs(grid_(k) - grid_(j));
                s += prod;
            }
            weights_(k) = ((k - d) % 2 == 0 ? 1.0 : -1.0) * s;
        }
    }

    RealVector node_derivative(Eigen::Index i) const {
        RealVector acc = RealVector::Zero(components());
        for (Eigen::Index k = 0; k < grid_.size(); ++k) {
            if (k == i) continue;
            const double dik = (weights_(k) / weights_(i)) / (grid_(i) - grid_(k));
            acc += dik * (values_.col(k) - values_.col(i));
        }
        return acc;
    }

    RealVector grid_;
    RealMatrix values_;
    int y_modes_ = 0;
    std::string description_;
    int blend_ = 8;
    RealVector weights_;
};

inline SampledProfile profile_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw IngestionError("profile: top level must be a JSON object");
    for (const char* key : {"grid", "components"}) {
        if (!j.contains(key)) throw IngestionError(std::string("profile: missing field \"") + key + "\"");
        if (!j.at(key).is_array()) throw IngestionError(std::string("profile: field \"") + key + "\" must be an array");
    }
    const auto& g = j.at("grid");
    RealVector grid(static_cast<Eigen::Index>(g.size()));
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!g[k].is_number()) throw IngestionError("profile: grid[" + std::to_string(k) + "] is not a number");
        grid(static_cast<Eigen::Index>(k)) = g[k].get<double>();
    }
    const auto& comps = j.at("components");
    RealMatrix values(static_cast<Eigen::Index>(comps.size()), grid.size());
    for (std::size_t c = 0; c < comps.size(); ++c) {
        const auto& row = comps[c];
        if (!row.is_array() || row.size() != g.size()) {
            throw IngestionError("profile: components[" + std::to_string(c) + "] must be an array of " +
                                 std::to_string(g.size()) + " numbers");
        }
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (!row[k].is_number()) {
                throw IngestionError("profile: components[" + std::to_string(c) + "][" + std::to_string(k) +
                                     "] is not a number");
            }
            values(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k)) = row[k].get<double>();
        }
    }
    int y_modes = 0;
    if (j.contains("y_modes")) {
        if (!j.at("y_modes").is_number_integer()) throw IngestionError("profile: \"y_modes\" must be an integer");
        y_modes = j.at("y_modes").get<int>();
    }
    std::string description;
    if (j.contains("description")) {
        if (!j.at("description").is_string()) throw IngestionError("profile: \"description\" must be a string");
        description = j.at("description").get<std::string>();
    }
    return SampledProfile(std::move(grid), std::move(values), y_modes, std::move(description));
}

inline nlohmann::json profile_to_json(const SampledProfile& p) {
    nlohmann::json j;
    j["grid"] = std::vector<double>(p.grid().data(), p.grid().data() + p.grid().size());
    j["components"] = nlohmann::json::array();
    for (Eigen::Index c = 0; c < p.components(); ++c) {
        const RealVector row = p.values().row(c).transpose();
        j["components"].push_back(std::vector<double>(row.data(), row.data() + row.size()));
    }
    if (p.y_modes() != 0) j["y_modes"] = p.y_modes();
    if (!p.description().empty()) j["description"] = p.description();
    return j;
}

inline SampledProfile load_profile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestionError("profile: cannot open " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw IngestionError("profile: " + path + ": " + e.what());
    }
    try {
        return profile_from_json(j);
    } catch (const IngestionError& e) {
        throw IngestionError(path + ": " + e.what());
    }
}

inline void save_profile(const SampledProfile& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IngestionError("profile: cannot write " + path);
    out << profile_to_json(p).dump() << '\n';
}

}  // namespace evans
