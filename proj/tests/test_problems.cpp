#include <catch_amalgamated.hpp>

#include "evans/asymptotics.hpp"
#include "evans/problems.hpp"
#include "evans/profile.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace evans;
using Catch::Approx;

namespace {

std::filesystem::path scratch_dir() {
    auto dir = std::filesystem::temp_directory_path() / "evans_test_problems";
    std::filesystem::create_directories(dir);
    return dir;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

SampledProfile sech_profile(int points, double half_width) {
    RealVector grid = RealVector::LinSpaced(points, -half_width, half_width);
    RealMatrix values(1, points);
    for (int k = 0; k < points; ++k) values(0, k) = nagumo_profile(grid(k));
    return SampledProfile(grid, values, 0, "sqrt(2) sech(x)");
}

double nearest(const ComplexVector& values, Complex z) {
    double best = 1e300;
    for (Eigen::Index i = 0; i < values.size(); ++i) best = std::min(best, std::abs(values(i) - z));
    return best;
}

}  // namespace

TEST_CASE("scalar Nagumo system", "[nagumo]") {
    CHECK(nagumo_profile(0.0) == Approx(std::sqrt(2.0)).epsilon(1e-15));
    const auto s = nagumo_scalar();
    CHECK(s.n == 2);
    CHECK(s.r == 1);
    CHECK(s.default_L == 10.0);

    ComplexMatrix want(2, 2);
    want << 0, 1, 1, 0;
    CHECK((s.A_inf(0.0, Side::plus) - want).norm() == 0.0);
    CHECK((s.A(40.0, 0.0) - want).norm() < 1e-30);
    const auto e = eig_dense(s.A_inf(0.0, Side::plus));
    CHECK(nearest(e.values, 1.0) < 1e-14);
    CHECK(nearest(e.values, -1.0) < 1e-14);

    // A+ loses hyperbolicity exactly at lambda = -1
    const auto at = [&](double l) {
        const auto ev = eig_dense(s.A_inf(l, Side::plus)).values;
        return std::min(std::abs(ev(0).real()), std::abs(ev(1).real()));
    };
    CHECK(at(-1.0) < 1e-12);
    CHECK(at(-0.99) > 0.05);
    CHECK(at(-1.01) < 1e-12);  // purely imaginary pair beyond the edge
}

TEST_CASE("coupled Nagumo system", "[nagumo]") {
    const auto s = nagumo_coupled(0.1, -1.0);
    CHECK(s.n == 4);
    CHECK(s.r == 2);

    // a = b = 0 decouples into two scalar copies
    const auto d = nagumo_coupled(0.0, 0.0);
    const auto one = nagumo_scalar();
    for (double x : {0.0, 0.7, 3.0}) {
        const ComplexMatrix a = d.A(x, Complex(0.3, 0.1));
        const ComplexMatrix a1 = one.A(x, Complex(0.3, 0.1));
        // state (u, u', v, v')
        CHECK(std::abs(a(1, 0) - a1(1, 0)) < 1e-15);
        CHECK(std::abs(a(3, 2) - a1(1, 0)) < 1e-15);
        CHECK(std::abs(a(1, 2)) == 0.0);
        CHECK(std::abs(a(3, 0)) == 0.0);
    }

    // asymptotic quartet nu = +/- sqrt(lambda + 1 +/- sqrt(ab))
    const Complex lambda(0.4, -0.2);
    const auto ev = eig_dense(s.A_inf(lambda, Side::plus)).values;
    const Complex sab = std::sqrt(Complex(-0.1));
    for (Complex mu : {lambda + 1.0 + sab, lambda + 1.0 - sab})
        for (double sgn : {1.0, -1.0}) CHECK(nearest(ev, sgn * std::sqrt(mu)) < 1e-12);
}

TEST_CASE("A(x) approaches A+ exponentially", "[problems]") {
    const std::vector<std::pair<EvansSystem, double>> cases{
        {nagumo_scalar(), 10.0}, {nagumo_coupled(0.1, -1.0), 10.0}, {kdv(4.0, 5.0), 30.0}};
    for (const auto& [s, L] : cases) {
        for (Complex lambda : {Complex(3.0, 0.0), Complex(0.5, 0.5)}) {
            const ComplexMatrix ap = s.A_inf(lambda, Side::plus);
            auto gap = [&](double x) { return (s.A(x, lambda) - ap).norm(); };
            CHECK(gap(L) <= 1e-6 * ap.norm());
            for (double x = 5.0; x + 1.0 <= L; x += 1.0) CHECK(gap(x + 1.0) <= 0.5 * gap(x));
        }
    }
}

TEST_CASE("KdV system", "[kdv]") {
    const KdvProfile prof{4.0, 5.0};
    CHECK(prof.value(0.0) == Approx(std::pow(75.0, 0.25)).epsilon(1e-14));
    CHECK(prof.value(0.0) == Approx(2.94283).epsilon(1e-5));

    const auto s = kdv(4.0, 5.0);
    CHECK(s.n == 3);
    CHECK(s.r == 1);
    CHECK(s.default_L == 30.0);
    CHECK_THROWS_AS(kdv(2.0, 5.0), InvalidArgument);
    CHECK_THROWS_AS(kdv(4.0, 0.0), InvalidArgument);

    // characteristic polynomial nu^3 - c nu + lambda
    for (Complex lambda : {Complex(0.5), Complex(-0.2, 0.7)}) {
        const auto ev = eig_dense(s.A_inf(lambda, Side::plus)).values;
        for (Eigen::Index j = 0; j < 3; ++j) {
            const Complex nu = ev(j);
            CHECK(std::abs(nu * nu * nu - 5.0 * nu + lambda) < 1e-12);
        }
    }

    // hyperbolicity fails exactly on the imaginary axis
    auto min_re = [&](Complex l) {
        const auto ev = eig_dense(s.A_inf(l, Side::plus)).values;
        return ev.real().cwiseAbs().minCoeff();
    };
    for (double y : {-2.0, -0.3, 0.0, 0.4, 1.5}) CHECK(min_re(Complex(0.0, y)) < 1e-12);
    for (Complex l : {Complex(0.1, 0.3), Complex(-0.1, 0.0), Complex(0.5, -2.0)}) CHECK(min_re(l) > 1e-3);
}

TEST_CASE("KdV derivative is consistent to second order", "[kdv]") {
    const KdvProfile prof{4.1, 5.0};
    auto err = [&](double h) {
        double worst = 0.0;
        for (double x : {-3.0, -1.2, -0.4, 0.3, 0.9, 2.5}) {
            const double fd = (prof.value(x + h) - prof.value(x - h)) / (2.0 * h);
            worst = std::max(worst, std::abs(fd - prof.derivative(x)));
        }
        return worst;
    };
    const double e1 = err(1e-2), e2 = err(5e-3);
    const double order = std::log2(e1 / e2);
    INFO("observed order " << order);
    CHECK(order >= 1.9);
}

TEST_CASE("Fourier differentiation operators", "[fourier]") {
    CHECK_THROWS_AS(fourier_diff_operator(7, FourierSymbol::one_plus_laplacian), InvalidArgument);
    CHECK_THROWS_AS(fourier_diff_operator(2, FourierSymbol::one_plus_laplacian), InvalidArgument);

    const int m = 8;
    const auto d1 = fourier_diff_operator(m, FourierSymbol::one_plus_laplacian);
    const auto d2 = fourier_diff_operator(m, FourierSymbol::one_plus_laplacian_squared);
    auto samples = [&](auto f) {
        ComplexVector v(m);
        for (int j = 0; j < m; ++j) v(j) = f(2.0 * std::numbers::pi * j / m);
        return v;
    };
    const ComplexVector one = ComplexVector::Constant(m, 2.5);
    CHECK((d1 * one - one).norm() < 1e-13);
    CHECK((d1 * samples([](double y) { return std::cos(y); })).norm() < 1e-13);
    const ComplexVector s2 = samples([](double y) { return std::sin(2.0 * y); });
    CHECK((d2 * s2 - 9.0 * s2).norm() < 1e-12);

    // every resolved mode below Nyquist, both symbols
    for (int k = 0; k < m / 2; ++k) {
        const double base = 1.0 - k * k;
        for (auto f : {+[](double y, int kk) { return std::cos(kk * y); }, +[](double y, int kk) { return std::sin(kk * y); }}) {
            ComplexVector v(m);
            for (int j = 0; j < m; ++j) v(j) = f(2.0 * std::numbers::pi * j / m, k);
            CHECK((d1 * v - base * v).norm() <= 1e-12 * std::max(1.0, v.norm()));
            CHECK((d2 * v - base * base * v).norm() <= 1e-12 * std::max(1.0, v.norm() * base * base));
        }
    }
    CHECK(d1.imag().norm() == 0.0);
}

TEST_CASE("Swift-Hohenberg with a zero profile", "[sh]") {
    SwiftHohenbergParams prm;
    const auto s = swift_hohenberg(prm, nullptr);
    CHECK(s.n == 32);
    CHECK(s.r == 16);
    CHECK(s.default_L == 50.0);

    // nu^2 = k^2 - 1 +/- i sqrt(lambda + mu) for wavenumbers k = -3..4
    const Complex lambda(3.0, 0.4);
    const ComplexMatrix a = s.A_inf(lambda, Side::plus);
    CHECK((s.A(7.0, lambda) - a).norm() == 0.0);
    const auto ev = eig_dense(a).values;
    const Complex root = std::sqrt(lambda + prm.mu);
    for (int k = -3; k <= 4; ++k) {
        for (double sgn : {1.0, -1.0}) {
            const Complex nu2 = static_cast<double>(k * k) - 1.0 + sgn * Complex(0.0, 1.0) * root;
            CHECK(nearest(ev, std::sqrt(nu2)) < 1e-6);
            CHECK(nearest(ev, -std::sqrt(nu2)) < 1e-6);
        }
    }
    FrameOptions opts;
    opts.allow_semisimple = true;
    const auto f = frame_at(a, lambda, 16, Side::plus, nullptr, FrameMode::sort, opts);
    CHECK(f.negative_count() == 16);
    CHECK(f.biorthogonality_error() <= 1e-9);
    CHECK_THROWS_AS(frame_at(a, lambda, 16, Side::plus, nullptr, FrameMode::sort), DegeneracyError);
}

TEST_CASE("Swift-Hohenberg rejects a profile with the wrong component count", "[sh]") {
    auto prof = std::make_shared<const SampledProfile>(sech_profile(101, 10.0));
    SwiftHohenbergParams prm;
    CHECK_THROWS_AS(swift_hohenberg(prm, prof), IngestionError);
}

TEST_CASE("Swift-Hohenberg profile potential enters the L1 block", "[sh]") {
    const int m = 8;
    RealVector grid = RealVector::LinSpaced(201, -20.0, 20.0);
    RealMatrix values(m, 201);
    for (int j = 0; j < m; ++j)
        for (int k = 0; k < 201; ++k) values(j, k) = 0.5 * (1.0 + 0.1 * j) / std::cosh(grid(k));
    auto prof = std::make_shared<const SampledProfile>(grid, values, m);
    SwiftHohenbergParams prm;
    const auto s = swift_hohenberg(prm, prof);
    CHECK(s.x_extent == 20.0);
    const double x = 0.0;
    const ComplexMatrix diff = s.A(x, 1.0) - s.A_inf(1.0, Side::plus);
    for (int j = 0; j < m; ++j) {
        const double u = 0.5 * (1.0 + 0.1 * j);
        const double want = 3.0 * prm.nu_param * u * u - 5.0 * std::pow(u, 4);
        CHECK(diff(3 * m + j, j).real() == Approx(want).epsilon(1e-12));
    }
    CHECK(diff.norm() == Approx(diff.block(3 * m, 0, m, m).norm()));
}

TEST_CASE("reflect_left", "[reflect]") {
    // constant coefficients: reflected spectrum is the negation
    ComplexMatrix am(2, 2);
    am << 0.5, 1.0, 0.0, -2.0;
    EvansSystem c;
    c.n = 2;
    c.r = 1;
    c.A = [am](double, Complex) { return am; };
    c.A_inf = [am](Complex, Side) { return am; };
    const auto rc = reflect_left(c);
    CHECK(rc.r == 1);
    CHECK((rc.A_inf(0.0, Side::plus) + am).norm() == 0.0);

    const auto s = kdv(4.0, 5.0);
    const auto rr = reflect_left(reflect_left(s));
    CHECK(reflect_left(s).r == 2);
    CHECK(rr.r == 1);
    for (double x : {0.0, 0.5, 3.0, 12.0})
        for (Complex l : {Complex(0.1, 0.2), Complex(-1.0)}) CHECK((rr.A(x, l) - s.A(x, l)).norm() == 0.0);

    // even Nagumo profile: reflected A is the original up to sign
    const auto n = nagumo_scalar();
    const auto rn = reflect_left(n);
    for (double x : {0.0, 1.0, 4.0}) CHECK((rn.A(x, 2.0) + n.A(x, 2.0)).norm() < 1e-15);
}

TEST_CASE("implanted-root system", "[implanted]") {
    const auto s = implanted_root(Complex(0.2, 0.1));
    CHECK(s.A(1.0, 0.0)(0, 0) == Complex(-1.0));
    CHECK(s.A(-0.0, 0.0)(0, 0) == Complex(1.0));
    CHECK(s.A(-1.0, Complex(0.2, 0.1))(1, 0) == Complex(0.0));
}

TEST_CASE("sampled sech profile interpolates to 1e-8", "[profile]") {
    const auto p = sech_profile(2001, 10.0);
    double worst = 0.0, worst_d = 0.0;
    for (int i = 0; i <= 64; ++i) {
        const double x = 10.0 * std::cos(std::numbers::pi * i / 64.0) * 0.999;
        worst = std::max(worst, std::abs(p(x)(0) - nagumo_profile(x)));
        const double exact_d = -nagumo_profile(x) * std::tanh(x);
        worst_d = std::max(worst_d, std::abs(p.derivative(x)(0) - exact_d));
    }
    CHECK(worst <= 1e-8);
    CHECK(worst_d <= 1e-6);
    for (int k = 0; k < 2001; k += 97) CHECK(p(p.grid()(k))(0) == p.values()(0, k));
    CHECK_THROWS_AS(p(10.5), Error);
}

TEST_CASE("profile round trip through a file", "[profile]") {
    const auto p = sech_profile(301, 10.0);
    const auto path = scratch_dir() / "sech.json";
    save_profile(p, path.string());
    const auto q = load_profile(path.string());
    CHECK(q.grid() == p.grid());
    CHECK(q.values() == p.values());
    CHECK(q.description() == p.description());
}

TEST_CASE("profile ingestion errors", "[profile]") {
    const auto dir = scratch_dir();
    auto expect = [&](const std::string& text, const std::string& fragment) {
        const auto path = dir / "bad.json";
        write_text(path, text);
        try {
            load_profile(path.string());
            FAIL("no error for " << text);
        } catch (const IngestionError& e) {
            INFO(e.what());
            CHECK(std::string(e.what()).find(fragment) != std::string::npos);
        }
    };
    expect(R"({"grid": [0.0], "components": [[1.0]]})", "grid");
    expect(R"({"grid": [0.0, 1.0, 0.5], "components": [[1, 2, 3]]})", "increasing");
    expect(R"({"grid": [0.0, 1.0, 2.0], "components": [[1, 2]]})", "components[0]");
    expect(R"({"grid": [0.0, 1.0, 2.0], "components": [[1, "x", 2]]})", "components[0][1]");
    expect(R"({"grid": [0.0, 1.0, 2.0]})", "components");
    expect(R"({"grid": [0.0, 1.0, 2.0], "components": [[1, 2, 3]], "y_modes": "eight"})", "y_modes");
    expect(R"({"grid": [0.0, 1.0,)", "parse");
    CHECK_THROWS_AS(load_profile((dir / "missing.json").string()), IngestionError);

    RealMatrix v(1, 3);
    v << 1.0, std::nan(""), 2.0;
    CHECK_THROWS_AS(SampledProfile(RealVector::LinSpaced(3, 0.0, 1.0), v), IngestionError);
}
