#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "test_support.hpp"
#include "xfer/kernel_transfer.hpp"

using namespace xfer;

namespace {

const KernelSpec kLinear{KernelKind::Linear, 0.0};

std::vector<std::vector<double>> points_of(const TaskDataset& data) {
    std::vector<std::vector<double>> pts;
    for (const auto& s : data.samples) pts.push_back(s.features);
    return pts;
}

}  // namespace

TEST_CASE("gram matrix basics") {
    const std::vector<std::vector<double>> basis{{1, 0}, {0, 1}};
    const auto identity = gram(basis, basis, kLinear);
    CHECK(identity(0, 0) == 1.0);
    CHECK(identity(0, 1) == 0.0);
    CHECK(identity(1, 0) == 0.0);
    CHECK(identity(1, 1) == 1.0);

    const KernelSpec gauss{KernelKind::Gaussian, 0.5};
    const auto diag = gram(basis, basis, gauss);
    CHECK(diag(0, 0) == 1.0);  // exp(0)
    CHECK(diag(1, 1) == 1.0);

    const std::vector<std::vector<double>> x{{0, 0}}, z{{1, 1}};
    CHECK(gram(x, z, gauss)(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

    CHECK_THROWS_AS(gram(x, {{1, 2, 3}}, kLinear), DataError);
}

TEST_CASE("gram matrices are symmetric and positive semidefinite") {
    Rng rng(71);
    const auto data = testsupport::random_dataset(rng, 20, 4);
    const auto pts = points_of(data);
    for (const KernelSpec& kernel : {kLinear, KernelSpec{KernelKind::Gaussian, 0.3}}) {
        const auto g = gram(pts, pts, kernel);
        CHECK((g - g.transpose()).cwiseAbs().maxCoeff() == 0.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g);
        CHECK(eig.eigenvalues().minCoeff() >= -1e-8);
    }
}

TEST_CASE("class balance weights") {
    CHECK(class_balance_zetas({+1, +1, -1, -1}) == std::vector<double>{1, 1, 1, 1});
    CHECK(class_balance_zetas({+1, -1, -1, -1}) ==
          std::vector<double>{2.0, 2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0});
    CHECK(class_balance_zetas({-1, +1, +1, +1}) ==
          std::vector<double>{2.0, 2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0});
    CHECK_THROWS_AS(class_balance_zetas({+1, +1}), DataError);

    // both classes carry total cost n/2
    const auto zetas = class_balance_zetas({+1, -1, -1, -1, -1, +1, -1});
    double pos = 0.0, neg = 0.0;
    const std::vector<int> labels{+1, -1, -1, -1, -1, +1, -1};
    for (std::size_t i = 0; i < zetas.size(); ++i) (labels[i] > 0 ? pos : neg) += zetas[i];
    CHECK(pos == doctest::Approx(3.5).epsilon(1e-12));
    CHECK(neg == doctest::Approx(3.5).epsilon(1e-12));
}

TEST_CASE("two-point toy problem puts the boundary on the perpendicular bisector") {
    TaskDataset data{"t", {{{0.0, 0.0}, -1}, {{2.0, 0.0}, +1}}};
    const auto model = solve_multikt(data, {}, {}, 1.0, kLinear);
    CHECK(model.decision(std::vector<double>{1.0, 0.0}) == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(model.decision(std::vector<double>{1.0, 5.0}) == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(multikt_predict(model, std::vector<double>{1.8, 0.3}) == +1);
    CHECK(multikt_predict(model, std::vector<double>{0.2, -0.3}) == -1);
}

TEST_CASE("beta = 0 equals the standalone no-transfer solver exactly") {
    Rng rng(72);
    for (int trial = 0; trial < 10; ++trial) {
        const auto data = testsupport::random_dataset(rng, 12, 3);
        std::vector<SourceModelK> sources;
        sources.push_back(train_source_model(testsupport::random_dataset(rng, 10, 3, "s"), 1.0,
                                             kLinear));
        const auto with_sources = solve_multikt(data, sources, {0.0}, 2.0, kLinear);
        const auto standalone = solve_multikt(data, {}, {}, 2.0, kLinear);
        CHECK(with_sources.bias == standalone.bias);
        for (std::size_t i = 0; i < data.size(); ++i) {
            CHECK(with_sources.dual_coeffs[i] == standalone.dual_coeffs[i]);
        }
        for (int probe = 0; probe < 10; ++probe) {
            std::vector<double> x{rng.normal(), rng.normal(), rng.normal()};
            CHECK(with_sources.decision(x) == standalone.decision(x));
        }
    }
}

TEST_CASE("an identical source with beta = 1 does not hurt training error") {
    Rng rng(73);
    const auto data = testsupport::random_dataset(rng, 16, 3);
    std::vector<SourceModelK> sources{train_source_model(data, 1.0, kLinear)};
    const auto transfer = solve_multikt(data, sources, {1.0}, 1.0, kLinear);
    const auto plain = solve_multikt(data, {}, {}, 1.0, kLinear);
    CHECK(multikt_accuracy(transfer, data) >= multikt_accuracy(plain, data));
}

TEST_CASE("closed-form LOO matches brute-force retraining") {
    Rng rng(74);
    for (int trial = 0; trial < 12; ++trial) {
        const std::size_t n = 4 + rng.below(9);  // up to 12 samples
        const auto data = testsupport::random_dataset(rng, n, 2);
        std::vector<SourceModelK> sources;
        std::vector<double> betas;
        if (trial % 2 == 0) {
            sources.push_back(train_source_model(testsupport::random_dataset(rng, 8, 2, "s"), 1.0,
                                                 kLinear));
            betas.push_back(0.4);
        }
        const auto closed = multikt_loo_values(data, sources, betas, 1.5, kLinear);
        const auto brute = testsupport::brute_force_loo(data, sources, betas, 1.5, kLinear);
        REQUIRE(closed.size() == brute.size());
        for (std::size_t i = 0; i < closed.size(); ++i) {
            CHECK(closed[i] == doctest::Approx(brute[i]).epsilon(1e-6));
        }
    }
}

TEST_CASE("LOO error edge cases") {
    // well-separated margins: every left-out point is still classified correctly
    TaskDataset good{"t",
                     {{{-3.0, 0.0}, -1},
                      {{-2.5, 0.5}, -1},
                      {{-2.8, -0.4}, -1},
                      {{3.0, 0.0}, +1},
                      {{2.5, -0.5}, +1},
                      {{2.9, 0.3}, +1}}};
    CHECK(loo_error(good, {}, {}, 10.0, kLinear) == 0.0);

    // duplicate points with opposite labels cannot be predicted from each other
    TaskDataset conflict{"t", {{{1.0, 1.0}, +1}, {{1.0, 1.0}, -1}}};
    CHECK(loo_error(conflict, {}, {}, 1.0, kLinear) >= 0.5);
}

TEST_CASE("optimize_betas prefers the related source and stays in the unit ball") {
    int good_runs = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(900 + seed);
        const auto data = testsupport::random_dataset(rng, 14, 3);
        TaskDataset flipped = data;
        for (auto& s : flipped.samples) s.label = -s.label;

        std::vector<SourceModelK> sources;
        sources.push_back(train_source_model(data, 1.0, kLinear));
        sources.push_back(train_source_model(flipped, 1.0, kLinear));

        const auto betas = optimize_betas(data, sources, 1.0, kLinear);
        REQUIRE(betas.size() == 2);
        CHECK(std::sqrt(betas[0] * betas[0] + betas[1] * betas[1]) <= 1.0 + 1e-12);
        if (betas[0] > betas[1] && betas[1] <= 0.1) ++good_runs;
    }
    CHECK(good_runs >= 18);
}

TEST_CASE("optimize_betas never loses to beta = 0 under its objective") {
    Rng rng(76);
    for (int trial = 0; trial < 8; ++trial) {
        const auto data = testsupport::random_dataset(rng, 12, 3);
        std::vector<SourceModelK> sources;
        sources.push_back(train_source_model(testsupport::random_dataset(rng, 10, 3, "a"), 1.0,
                                             kLinear));
        sources.push_back(train_source_model(testsupport::random_dataset(rng, 10, 3, "b"), 1.0,
                                             kLinear));
        const auto betas = optimize_betas(data, sources, 1.0, kLinear);
        const std::vector<double> zeros(sources.size(), 0.0);
        CHECK(loo_surrogate(data, sources, betas, 1.0, kLinear) <=
              loo_surrogate(data, sources, zeros, 1.0, kLinear) + 1e-12);
    }
    CHECK(optimize_betas(testsupport::make_1d({1, 2}, {-1, +1}), {}, 1.0, kLinear).empty());
}

TEST_CASE("multikt_predict sign cases") {
    TaskDataset data{"t", {{{0.0}, -1}, {{2.0}, +1}}};
    const auto model = solve_multikt(data, {}, {}, 1.0, kLinear);
    CHECK(multikt_predict(model, std::vector<double>{2.0}) == +1);
    CHECK(multikt_predict(model, std::vector<double>{0.0}) == -1);

    // an exactly-zero decision value goes positive
    MultiKTModel zero;
    zero.training_points = {{1.0}};
    zero.dual_coeffs = {0.0};
    zero.bias = 0.0;
    zero.kernel = kLinear;
    CHECK(zero.decision(std::vector<double>{5.0}) == 0.0);
    CHECK(multikt_predict(zero, std::vector<double>{5.0}) == +1);
}

TEST_CASE("solver contract checks") {
    TaskDataset data{"t", {{{0.0}, -1}, {{2.0}, +1}}};
    CHECK_THROWS_AS(solve_multikt(data, {}, {}, 0.0, kLinear), DataError);
    CHECK_THROWS_AS(solve_multikt(data, {}, {0.5}, 1.0, kLinear), DataError);

    SourceModelK wrong_kernel{"s", {{1.0}}, {1.0}, 0.0, KernelSpec{KernelKind::Gaussian, 0.2}};
    CHECK_THROWS_AS(solve_multikt(data, {wrong_kernel}, {0.5}, 1.0, kLinear), DataError);

    // a single-label target is solvable with the documented zeta fallback
    TaskDataset one_label{"t", {{{1.0}, +1}, {{2.0}, +1}}};
    const auto model = solve_multikt(one_label, {}, {}, 1.0, kLinear);
    CHECK(model.zetas == std::vector<double>{1.0, 1.0});
}

TEST_CASE("select_C is deterministic and returns a grid value") {
    Rng rng(77);
    std::vector<TaskDataset> pool{testsupport::random_dataset(rng, 30, 3, "a"),
                                  testsupport::random_dataset(rng, 30, 3, "b")};
    const double c1 = select_C(pool, kLinear, 5);
    const double c2 = select_C(pool, kLinear, 5);
    CHECK(c1 == c2);
    bool on_grid = false;
    for (double g : {0.01, 0.1, 1.0, 10.0, 100.0}) on_grid |= (c1 == g);
    CHECK(on_grid);

    // tiny or single-label pools fall back to 1.0
    CHECK(select_C({testsupport::make_1d({1, 2}, {-1, +1})}, kLinear, 0) == 1.0);
}
