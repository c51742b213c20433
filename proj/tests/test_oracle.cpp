#include <catch_amalgamated.hpp>

#include "evans/oracle.hpp"
#include "evans/problems.hpp"
#include "evans/roots.hpp"

#include <cmath>

using namespace evans;

namespace {

const double kInvSqrt10 = 1.0 / std::sqrt(10.0);

// Golden-section minimum of |f| on the segment a -> b.
template <class F>
Complex minimise_on_segment(F&& f, Complex a, Complex b, double tol = 1e-9) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = 0.0, hi = 1.0;
    double t1 = hi - g * (hi - lo), t2 = lo + g * (hi - lo);
    double f1 = std::abs(f(a + t1 * (b - a))), f2 = std::abs(f(a + t2 * (b - a)));
    while ((hi - lo) * std::abs(b - a) > tol) {
        if (f1 < f2) {
            hi = t2;
            t2 = t1;
            f2 = f1;
            t1 = hi - g * (hi - lo);
            f1 = std::abs(f(a + t1 * (b - a)));
        } else {
            lo = t1;
            t1 = t2;
            f1 = f2;
            t2 = lo + g * (hi - lo);
            f2 = std::abs(f(a + t2 * (b - a)));
        }
    }
    return a + 0.5 * (lo + hi) * (b - a);
}

// Shooting-Wronskian zero near `guess`: alternate line searches along the
// real and imaginary directions.
Complex shooting_zero(const EvansSystem& s, Complex guess, double half_width, const ShootingConfig& cfg) {
    auto w = [&](Complex l) { return shooting_wronskian(s, l, cfg); };
    Complex z = guess;
    for (int pass = 0; pass < 3; ++pass) {
        z = minimise_on_segment(w, z - half_width, z + half_width);
        z = minimise_on_segment(w, z - Complex(0.0, half_width), z + Complex(0.0, half_width));
        half_width *= 0.1;
    }
    return z;
}

double nearest(const std::vector<Complex>& set, Complex z) {
    double best = 1e300;
    for (Complex e : set) best = std::min(best, std::abs(e - z));
    return best;
}

}  // namespace

TEST_CASE("shooting Wronskian of scalar Nagumo", "[oracle][benchmark]") {
    const auto s = nagumo_scalar();
    ShootingConfig cfg;
    cfg.anchor = Complex(2.5);
    const double base = std::abs(shooting_wronskian(s, 2.5, cfg));
    const double at3 = std::abs(shooting_wronskian(s, 3.0, cfg));
    const double at1 = std::abs(shooting_wronskian(s, 1.0, cfg));
    INFO("|W(2.5)| = " << base << ", |W(3)| = " << at3 << ", |W(1)| = " << at1);
    CHECK(at3 <= 1e-6 * base);
    CHECK(at1 >= 1e-2 * base);
}

TEST_CASE("shooting Wronskian of the implanted-root system", "[oracle]") {
    const Complex root(0.4, 0.1);
    const auto s = implanted_root(root);
    ShootingConfig cfg;
    cfg.anchor = Complex(0.0);
    CHECK(std::abs(shooting_wronskian(s, root, cfg)) < 1e-10);
    for (Complex l : {Complex(0.0), Complex(1.0, -1.0), Complex(-0.5, 0.7), root + 0.05}) {
        CHECK(std::abs(shooting_wronskian(s, l, cfg)) > 1e-3);
    }
}

TEST_CASE("shooting winding numbers", "[oracle][benchmark]") {
    CHECK(shooting_winding(nagumo_scalar(), 3.0, 0.5, 32) == 1);
    CHECK(shooting_winding(nagumo_coupled(0.1, -1.0), 3.0, 1.0, 64) == 2);
    CHECK(shooting_winding(nagumo_coupled(0.1, -1.0), Complex(1.0, 0.0), 0.5, 32) == 0);
}

TEST_CASE("shooting rejects large systems", "[oracle]") {
    const auto sh = swift_hohenberg({}, nullptr);
    CHECK_THROWS_AS(shooting_wronskian(sh, 3.0), InvalidArgument);
}

TEST_CASE("finite differences: scalar Nagumo", "[oracle][benchmark]") {
    const auto ev = fd_eigs(nagumo_scalar_operator(), 15.0, 600);
    INFO("top eigenvalues " << ev[0] << ", " << ev[1] << ", " << ev[2]);
    CHECK(std::abs(ev[0] - 3.0) <= 1e-3);
    CHECK(std::abs(ev[1]) <= 1e-3);
    CHECK(ev[2].real() < -1.0 + 1e-2);
}

TEST_CASE("finite differences: coupled Nagumo", "[oracle][benchmark]") {
    const auto ev = fd_eigs(nagumo_coupled_operator(0.1, -1.0), 15.0, 600);
    INFO("top eigenvalues " << ev[0] << ", " << ev[1]);
    CHECK(std::abs(ev[0] - Complex(3.0, kInvSqrt10)) <= 1e-3);
    CHECK(std::abs(ev[1] - Complex(3.0, -kInvSqrt10)) <= 1e-3);
}

TEST_CASE("finite differences: zero potential", "[oracle]") {
    const auto ev = fd_eigs(zero_potential_operator(), 15.0, 300);
    for (Complex e : ev) {
        CHECK(e.real() < -1.0);
        CHECK(std::abs(e.imag()) < 1e-12);
    }
    CHECK_THROWS_AS(fd_eigs(zero_potential_operator(), -1.0, 300), InvalidArgument);
}

TEST_CASE("finite differences converge at second order", "[oracle]") {
    const double e300 = std::abs(fd_eigs(nagumo_scalar_operator(), 15.0, 300)[0] - 3.0);
    const double e600 = std::abs(fd_eigs(nagumo_scalar_operator(), 15.0, 600)[0] - 3.0);
    const double h300 = 30.0 / 301.0, h600 = 30.0 / 601.0;
    const double order = std::log(e300 / e600) / std::log(h300 / h600);
    INFO("errors " << e300 << ", " << e600 << "; observed order " << order);
    CHECK(order >= 1.8);
}

TEST_CASE("zero sets agree across methods", "[oracle][roots][benchmark]") {
    struct Case {
        EvansSystem system;
        SecondOrderOperator op;
        Box region;
        int expected;
    };
    std::vector<Case> cases{{nagumo_scalar(), nagumo_scalar_operator(), {-0.37, 3.41, -0.43, 0.51}, 2},
                            {nagumo_coupled(0.1, -1.0), nagumo_coupled_operator(0.1, -1.0), {2.5, 3.5, -0.5, 0.5}, 2}};
    for (const auto& c : cases) {
        const auto rep = root_localize(c.system, c.region, {});
        const auto fd = fd_eigs(c.op, 15.0, 1200);
        CHECK(static_cast<int>(rep.roots.size()) == c.expected);
        for (const auto& r : rep.roots) {
            ShootingConfig cfg;
            cfg.anchor = r.root;
            const Complex z = shooting_zero(c.system, r.root, 5e-3, cfg);
            INFO(c.system.label << ": Evans root " << r.root << ", shooting zero " << z);
            CHECK(std::abs(z - r.root) <= 1e-3);
            CHECK(nearest(fd, r.root) <= 5e-3);
        }
    }
}
