#include "scpo/dataset.hpp"
#include "scpo/errors.hpp"
#include "scpo/surrogate.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace scpo;

namespace {

// Bridge between the Eigen-facing API and the oracle's plain containers.
std::vector<std::vector<double>> rows_of(const Dataset& d) {
    std::vector<std::vector<double>> out;
    for (Eigen::Index i = 0; i < d.row_count(); ++i) {
        std::vector<double> row;
        for (Eigen::Index j = 0; j < d.feature_count(); ++j) row.push_back(d.features(i, j));
        out.push_back(row);
    }
    return out;
}

std::vector<std::vector<double>> theta_rows(const ThetaMatrix& theta) {
    std::vector<std::vector<double>> out;
    for (Eigen::Index a = 0; a < theta.entries.rows(); ++a) {
        std::vector<double> row;
        for (Eigen::Index y = 0; y < theta.entries.cols(); ++y) row.push_back(theta.entries(a, y));
        out.push_back(row);
    }
    return out;
}

Dataset small_problem(std::uint64_t seed, int per_class = 12) {
    Dataset raw = synthetic::gaussian_blobs(
        per_class, {{{-1.0, 0.4}}, {{1.2, -0.3}}, {{0.1, 1.5}}}, {0.8, 0.9, 0.7}, seed);
    return add_intercept(raw);
}

ThetaMatrix random_theta(Eigen::Index m, Eigen::Index c, std::uint64_t seed, double scale = 0.5) {
    std::mt19937_64 rng(seed);
    ThetaMatrix theta(m, c);
    for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index y = 0; y < c; ++y)
            theta.entries(a, y) = scale * synthetic::gauss(rng);
    return theta;
}

} // namespace

TEST_CASE("sigmoid: bounds, symmetry, monotonicity, saturation") {
    CHECK(sigmoid(0.0, 2.0) == 0.5);
    for (double gamma : {0.5, 1.0, 5.0}) {
        for (double a : {-3.0, -0.4, 0.0, 0.7, 2.5}) {
            const double s = sigmoid(a, gamma);
            CHECK(s > 0.0);
            CHECK(s < 1.0);
            CHECK(s + sigmoid(-a, gamma) == doctest::Approx(1.0).epsilon(1e-15));
            // matches the textbook form where that form is safe
            CHECK(s == doctest::Approx(1.0 / (1.0 + std::exp(-gamma * a))).epsilon(1e-14));
        }
        CHECK(sigmoid(0.2, gamma) > sigmoid(0.1, gamma));
    }
    // extreme arguments saturate instead of overflowing
    CHECK(sigmoid(1e6, 10.0) == 1.0);
    CHECK(sigmoid(-1e6, 10.0) == 0.0);
    CHECK(std::isfinite(sigmoid(-745.0, 1.0)));
}

TEST_CASE("sigmoid: large gamma approaches the step indicator") {
    // the soft count tends to the hard count as the sharpness grows
    for (double a : {-0.5, -0.05, 0.05, 0.5}) {
        const double hard = a > 0 ? 1.0 : 0.0;
        CHECK(sigmoid(a, 1e4) == doctest::Approx(hard).epsilon(1e-12));
    }
}

TEST_CASE("Hyperparams validation") {
    Hyperparams hp;
    hp.epsilon = 0.1;
    CHECK_NOTHROW(hp.validate());
    hp.eta = 0.0; // explicitly allowed: zero learning rate freezes descent
    CHECK_NOTHROW(hp.validate());

    auto expect_invalid = [](Hyperparams bad) {
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    };
    Hyperparams bad = hp;
    bad.epsilon = 0.0;
    expect_invalid(bad);
    bad = hp;
    bad.epsilon = 1.0;
    expect_invalid(bad);
    bad = hp;
    bad.lambda = 0.0;
    expect_invalid(bad);
    bad = hp;
    bad.gamma = -1.0;
    expect_invalid(bad);
    bad = hp;
    bad.eta = -0.5;
    expect_invalid(bad);
    bad = hp;
    bad.max_iters = 0;
    expect_invalid(bad);
    bad = hp;
    bad.rel_tol = -1.0;
    expect_invalid(bad);
}

TEST_CASE("evaluate: loss matches the scalar-loop oracle to 1e-12") {
    for (std::uint64_t seed : {7u, 8u, 9u}) {
        Dataset train = small_problem(seed);
        ThetaMatrix theta = random_theta(train.feature_count(), 3, seed * 11);
        for (bool log_measure : {false, true}) {
            Hyperparams hp;
            hp.epsilon = 0.1;
            hp.lambda = 250.0;
            hp.gamma = 3.0;
            const InefficiencyMeasure ineff = log_measure ? InefficiencyMeasure::log_size()
                                                          : InefficiencyMeasure::identity();
            SurrogateEval ev = evaluate(theta, train, hp, ineff);
            const double ref = oracle::surrogate_loss(rows_of(train), train.labels,
                                                      theta_rows(theta), hp.epsilon, hp.lambda,
                                                      hp.gamma, hp.q, log_measure);
            CHECK(ev.loss == doctest::Approx(ref).epsilon(1e-12));
        }
    }
}

TEST_CASE("evaluate: closed form at theta = 0") {
    // every score is 0, so every sigmoid argument is -q: with C classes,
    // s_i = C * sigmoid(-gamma q) and V = sigmoid(-gamma q) - (1 - epsilon)
    Dataset train = small_problem(31);
    const int c = 3;
    ThetaMatrix theta(train.feature_count(), c); // zero-initialized
    Hyperparams hp;
    hp.epsilon = 0.1;
    hp.lambda = 100.0;
    hp.gamma = 2.0;
    SurrogateEval ev = evaluate(theta, train, hp, InefficiencyMeasure::identity());
    const double sig = sigmoid(-hp.q, hp.gamma);
    const double expected = c * sig + hp.lambda * std::pow(sig - (1.0 - hp.epsilon), 2.0);
    CHECK(ev.loss == doctest::Approx(expected).epsilon(1e-14));
    CHECK(ev.validity_gap == doctest::Approx(sig - (1.0 - hp.epsilon)).epsilon(1e-14));
    for (Eigen::Index i = 0; i < ev.soft_sizes.size(); ++i) {
        CHECK(ev.soft_sizes(i) == doctest::Approx(c * sig).epsilon(1e-14));
    }
}

TEST_CASE("evaluate: soft sizes stay in (0, C); validity gap stays in its band") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        Dataset train = small_problem(1000 + trial);
        ThetaMatrix theta = random_theta(train.feature_count(), 3, rng(), 2.0);
        Hyperparams hp;
        hp.epsilon = 0.05 + 0.4 * synthetic::uniform01(rng);
        hp.gamma = 0.5 + 5.0 * synthetic::uniform01(rng);
        SurrogateEval ev = evaluate(theta, train, hp, InefficiencyMeasure::identity());
        for (Eigen::Index i = 0; i < ev.soft_sizes.size(); ++i) {
            CHECK(ev.soft_sizes(i) > 0.0);
            CHECK(ev.soft_sizes(i) < 3.0);
        }
        // V = mean sigmoid - (1 - eps), and the mean sigmoid lies in (0,1)
        CHECK(ev.validity_gap > -(1.0 - hp.epsilon));
        CHECK(ev.validity_gap < hp.epsilon);
        CHECK(ev.loss > 0.0);
    }
}

TEST_CASE("evaluate: gradient matches central finite differences") {
    // FD on the exact analytic gradient across the hyperparameter grid corners
    for (double gamma : {1.0, 2.0, 5.0, 10.0}) {
        for (double lambda : {10.0, 100.0}) {
            Dataset train = small_problem(200 + static_cast<std::uint64_t>(gamma * 10 + lambda));
            ThetaMatrix theta = random_theta(train.feature_count(), 3, 5000 +
                                             static_cast<std::uint64_t>(gamma + lambda));
            Hyperparams hp;
            hp.epsilon = 0.1;
            hp.lambda = lambda;
            hp.gamma = gamma;
            SurrogateEval ev = evaluate(theta, train, hp, InefficiencyMeasure::identity());

            auto loss_at = [&](const std::vector<double>& flat) {
                Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(
                    flat.data(), static_cast<Eigen::Index>(flat.size()));
                ThetaMatrix t = ThetaMatrix::unflatten(v, train.feature_count(), 3);
                return evaluate(t, train, hp, InefficiencyMeasure::identity()).loss;
            };
            Eigen::VectorXd flat0 = theta.flatten();
            std::vector<double> at(flat0.data(), flat0.data() + flat0.size());
            std::vector<double> fd = oracle::fd_gradient(loss_at, at, 1e-6);
            REQUIRE(static_cast<Eigen::Index>(fd.size()) == ev.gradient.size());
            for (Eigen::Index p = 0; p < ev.gradient.size(); ++p) {
                CHECK(ev.gradient(p) ==
                      doctest::Approx(fd[static_cast<std::size_t>(p)]).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("evaluate: gradient under the log size measure also matches FD") {
    Dataset train = small_problem(404);
    ThetaMatrix theta = random_theta(train.feature_count(), 3, 405);
    Hyperparams hp;
    hp.epsilon = 0.15;
    hp.lambda = 50.0;
    hp.gamma = 4.0;
    SurrogateEval ev = evaluate(theta, train, hp, InefficiencyMeasure::log_size());
    auto loss_at = [&](const std::vector<double>& flat) {
        Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(
            flat.data(), static_cast<Eigen::Index>(flat.size()));
        ThetaMatrix t = ThetaMatrix::unflatten(v, train.feature_count(), 3);
        return evaluate(t, train, hp, InefficiencyMeasure::log_size()).loss;
    };
    Eigen::VectorXd flat = theta.flatten();
    std::vector<double> at(flat.data(), flat.data() + flat.size());
    std::vector<double> fd = oracle::fd_gradient(loss_at, at, 1e-6);
    for (Eigen::Index p = 0; p < ev.gradient.size(); ++p) {
        CHECK(ev.gradient(p) == doctest::Approx(fd[static_cast<std::size_t>(p)]).epsilon(1e-6));
    }
}

TEST_CASE("evaluate: dimension and label guards") {
    Dataset train = small_problem(11);
    ThetaMatrix narrow(train.feature_count() - 1, 3);
    CHECK_THROWS_AS(evaluate(narrow, train, Hyperparams{}, InefficiencyMeasure::identity()),
                    std::invalid_argument);
    ThetaMatrix few_classes(train.feature_count(), 2); // data has labels up to 3
    CHECK_THROWS_AS(evaluate(few_classes, train, Hyperparams{}, InefficiencyMeasure::identity()),
                    std::invalid_argument);
    Dataset empty;
    CHECK_THROWS_AS(evaluate(ThetaMatrix(2, 2), empty, Hyperparams{},
                             InefficiencyMeasure::identity()),
                    DataError);
}

TEST_CASE("transform_loss: values and gradient scaling") {
    Eigen::VectorXd g(2);
    g << 2.0, -4.0;
    const double L = 2.0;

    auto [v0, g0] = transform_loss(L, g, Transform::identity);
    CHECK(v0 == 2.0);
    CHECK(g0 == g);

    auto [v1, g1] = transform_loss(L, g, Transform::log);
    CHECK(v1 == doctest::Approx(std::log(2.0)));
    CHECK(g1(0) == doctest::Approx(1.0));
    CHECK(g1(1) == doctest::Approx(-2.0));

    auto [v2, g2] = transform_loss(L, g, Transform::neg_inverse);
    CHECK(v2 == doctest::Approx(-0.5));
    CHECK(g2(0) == doctest::Approx(0.5));
    CHECK(g2(1) == doctest::Approx(-1.0));

    auto [v3, g3] = transform_loss(L, g, Transform::neg_inverse_square);
    CHECK(v3 == doctest::Approx(-0.25));
    CHECK(g3(0) == doctest::Approx(0.5));
    CHECK(g3(1) == doctest::Approx(-1.0));

    // oracle cross-check on the values
    for (int kind = 0; kind < 4; ++kind) {
        auto [v, gv] = transform_loss(3.7, g, static_cast<Transform>(kind));
        CHECK(v == doctest::Approx(oracle::transform_value(3.7, kind)).epsilon(1e-15));
    }

    // non-identity transforms refuse non-positive loss
    CHECK_NOTHROW(transform_loss(-1.0, g, Transform::identity));
    CHECK_THROWS_AS(transform_loss(0.0, g, Transform::log), std::invalid_argument);
    CHECK_THROWS_AS(transform_loss(-1.0, g, Transform::neg_inverse), std::invalid_argument);
    CHECK_THROWS_AS(transform_loss(0.0, g, Transform::neg_inverse_square), std::invalid_argument);
}

TEST_CASE("transform_loss: transformed gradient is FD of transformed value") {
    // chain rule sanity: d T(L(theta)) = T'(L) dL, probed through a 1-D slice
    Dataset train = small_problem(909);
    ThetaMatrix theta = random_theta(train.feature_count(), 3, 910);
    Hyperparams hp;
    hp.epsilon = 0.1;
    Eigen::VectorXd direction = random_theta(train.feature_count(), 3, 911).flatten();
    direction.normalize();

    for (Transform kind : {Transform::log, Transform::neg_inverse,
                           Transform::neg_inverse_square}) {
        auto value_at = [&](double t) {
            ThetaMatrix shifted = ThetaMatrix::unflatten(theta.flatten() + t * direction,
                                                         train.feature_count(), 3);
            SurrogateEval ev = evaluate(shifted, train, hp, InefficiencyMeasure::identity());
            return transform_loss(ev.loss, ev.gradient, kind).first;
        };
        SurrogateEval ev = evaluate(theta, train, hp, InefficiencyMeasure::identity());
        auto [tv, tg] = transform_loss(ev.loss, ev.gradient, kind);
        const double h = 1e-6;
        const double fd = (value_at(h) - value_at(-h)) / (2 * h);
        CHECK(tg.dot(direction) == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("transform names parse and print") {
    CHECK(parse_transform("identity") == Transform::identity);
    CHECK(parse_transform("log") == Transform::log);
    CHECK(parse_transform("neg_inverse") == Transform::neg_inverse);
    CHECK(parse_transform("neg_inverse_square") == Transform::neg_inverse_square);
    CHECK_THROWS_AS(parse_transform("sqrt"), std::invalid_argument);
    for (Transform kind : {Transform::identity, Transform::log, Transform::neg_inverse,
                           Transform::neg_inverse_square}) {
        CHECK(parse_transform(transform_name(kind)) == kind);
    }
}
