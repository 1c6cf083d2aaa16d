#include "scpo/dataset.hpp"
#include "scpo/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>

using namespace scpo;

namespace {

std::string temp_csv(const std::string& name, const std::string& content) {
    std::string path = "/tmp/scpo_test_" + name;
    std::ofstream out(path);
    out << content;
    return path;
}

} // namespace

TEST_CASE("load_csv: basic parse, lexicographic label encoding") {
    auto path = temp_csv("basic.csv", "a,b,species\n1,2,dog\n3,4,cat\n5,6,dog\n");
    Dataset d = load_csv(path, "species");
    CHECK(d.row_count() == 3);
    CHECK(d.feature_count() == 2);
    CHECK(d.class_count() == 2);
    CHECK(d.feature_names == std::vector<std::string>{"a", "b"});
    // "cat" < "dog" lexicographically, so cat=1, dog=2
    CHECK(d.label_names == std::vector<std::string>{"cat", "dog"});
    CHECK(d.labels == std::vector<int>{2, 1, 2});
    CHECK(d.features(0, 0) == 1.0);
    CHECK(d.features(2, 1) == 6.0);
}

TEST_CASE("load_csv: label column may sit anywhere") {
    auto path = temp_csv("mid.csv", "a,species,b\n1,x,2\n3,y,4\n");
    Dataset d = load_csv(path, "species");
    CHECK(d.feature_names == std::vector<std::string>{"a", "b"});
    CHECK(d.features(1, 1) == 4.0);
}

TEST_CASE("load_csv: empty cell and NA are missing; labels may not be missing") {
    auto path = temp_csv("missing.csv", "a,b,y\n1,,p\nNA,4,q\n");
    Dataset d = load_csv(path, "y");
    CHECK(std::isnan(d.features(0, 1)));
    CHECK(std::isnan(d.features(1, 0)));
    CHECK(d.has_missing());

    auto bad = temp_csv("missing_label.csv", "a,y\n1,p\n2,\n");
    CHECK_THROWS_AS(load_csv(bad, "y"), DataError);
}

TEST_CASE("load_csv: error cases") {
    CHECK_THROWS_AS(load_csv("/tmp/scpo_definitely_not_there.csv", "y"), DataError);

    auto nolabel = temp_csv("nolabel.csv", "a,b\n1,2\n");
    CHECK_THROWS_AS(load_csv(nolabel, "y"), DataError);

    auto ragged = temp_csv("ragged.csv", "a,b,y\n1,2,p\n1,q\n");
    CHECK_THROWS_AS(load_csv(ragged, "y"), DataError);

    auto junk = temp_csv("junk.csv", "a,y\nbanana,p\n1,q\n");
    CHECK_THROWS_AS(load_csv(junk, "y"), DataError);

    auto oneclass = temp_csv("oneclass.csv", "a,y\n1,p\n2,p\n");
    CHECK_THROWS_AS(load_csv(oneclass, "y"), DataError);

    auto empty = temp_csv("empty.csv", "");
    CHECK_THROWS_AS(load_csv(empty, "y"), DataError);

    auto headeronly = temp_csv("headeronly.csv", "a,y\n");
    CHECK_THROWS_AS(load_csv(headeronly, "y"), DataError);
}

TEST_CASE("load_csv: reloading the same file yields identical encodings") {
    auto path = temp_csv("stable.csv", "a,y\n1,zebra\n2,ant\n3,mouse\n");
    Dataset d1 = load_csv(path, "y");
    Dataset d2 = load_csv(path, "y");
    CHECK(d1.labels == d2.labels);
    CHECK(d1.label_names == d2.label_names);
}

TEST_CASE("impute_means: train mean fills both train and other datasets") {
    // column a = [1, missing, 3] -> mean of observed {1,3} = 2. A second,
    // fully observed column keeps the missing-cell row from being dropped as
    // an all-missing row.
    Dataset train;
    train.feature_names = {"a", "b"};
    train.label_names = {"p", "q"};
    train.features.resize(3, 2);
    train.features << 1, 10, std::nan(""), 11, 3, 12;
    train.labels = {1, 2, 1};

    Dataset test = train;
    test.features(0, 0) = 100.0; // shift test distribution
    ImputeResult r = impute_means(train, {test});
    CHECK(r.train.features(1, 0) == 2.0);
    CHECK(r.others[0].features(1, 0) == 2.0); // train mean, not test mean
    CHECK(r.train.features(0, 0) == 1.0);     // observed values untouched
    CHECK(r.others[0].features(0, 0) == 100.0);
    CHECK(r.train.features(1, 1) == 11.0);
    CHECK(r.dropped_rows == std::vector<Eigen::Index>{0, 0});
}

TEST_CASE("impute_means: clean data returned unchanged") {
    Dataset d;
    d.feature_names = {"a", "b"};
    d.label_names = {"p", "q"};
    d.features.resize(2, 2);
    d.features << 1, 2, 3, 4;
    d.labels = {1, 2};
    ImputeResult r = impute_means(d, {});
    CHECK(r.train.features == d.features);
}

TEST_CASE("impute_means: all-missing rows dropped and counted") {
    Dataset d;
    d.feature_names = {"a", "b"};
    d.label_names = {"p", "q"};
    d.features.resize(3, 2);
    d.features << 1, 2, std::nan(""), std::nan(""), 5, 6;
    d.labels = {1, 2, 1};
    ImputeResult r = impute_means(d, {});
    CHECK(r.train.row_count() == 2);
    CHECK(r.dropped_rows[0] == 1);
    CHECK(r.train.labels == std::vector<int>{1, 1});
}

TEST_CASE("impute_means: column with no observed train values is an error") {
    Dataset d;
    d.feature_names = {"a", "b"};
    d.label_names = {"p", "q"};
    d.features.resize(2, 2);
    d.features << std::nan(""), 2, std::nan(""), 4;
    d.labels = {1, 2};
    CHECK_THROWS_AS(impute_means(d, {}), DataError);
}

TEST_CASE("split: deterministic, disjoint, exhaustive") {
    Dataset d;
    d.feature_names = {"a"};
    d.label_names = {"p", "q"};
    d.features.resize(10, 1);
    for (int i = 0; i < 10; ++i) d.features(i, 0) = i;
    d.labels = {1, 2, 1, 2, 1, 2, 1, 2, 1, 2};

    SplitSpec spec{6, 2, 2, 42};
    SplitResult r1 = split(d, spec);
    SplitResult r2 = split(d, spec);
    CHECK(r1.train.features == r2.train.features);
    CHECK(r1.calib.features == r2.calib.features);
    CHECK(r1.test.features == r2.test.features);
    CHECK(r1.train.row_count() == 6);
    CHECK(r1.calib.row_count() == 2);
    CHECK(r1.test.row_count() == 2);

    // partition is a bijection: the multiset of row ids is exactly 0..9
    std::map<double, int> seen;
    for (Eigen::Index i = 0; i < 6; ++i) seen[r1.train.features(i, 0)]++;
    for (Eigen::Index i = 0; i < 2; ++i) seen[r1.calib.features(i, 0)]++;
    for (Eigen::Index i = 0; i < 2; ++i) seen[r1.test.features(i, 0)]++;
    CHECK(seen.size() == 10);
    for (const auto& [v, n] : seen) CHECK(n == 1);

    // a different seed moves rows around
    SplitResult r3 = split(d, SplitSpec{6, 2, 2, 43});
    CHECK(r1.train.features != r3.train.features);
}

TEST_CASE("split: labels travel with their rows") {
    Dataset d;
    d.feature_names = {"a"};
    d.label_names = {"p", "q"};
    d.features.resize(4, 1);
    d.features << 0, 1, 2, 3;
    d.labels = {1, 2, 1, 2}; // label matches parity of the feature value
    SplitResult r = split(d, SplitSpec{2, 1, 1, 7});
    auto check_pairing = [](const Dataset& part) {
        for (Eigen::Index i = 0; i < part.row_count(); ++i) {
            const int expect = (static_cast<int>(part.features(i, 0)) % 2 == 0) ? 1 : 2;
            CHECK(part.labels[static_cast<std::size_t>(i)] == expect);
        }
    };
    check_pairing(r.train);
    check_pairing(r.calib);
    check_pairing(r.test);
}

TEST_CASE("split: count mismatch and degenerate specs error") {
    Dataset d;
    d.feature_names = {"a"};
    d.label_names = {"p", "q"};
    d.features.resize(10, 1);
    d.features.setZero();
    d.labels.assign(10, 1);
    CHECK_THROWS_AS(split(d, SplitSpec{5, 2, 2, 0}), DataError);
    CHECK_THROWS_AS(split(d, SplitSpec{10, 0, 0, 0}), DataError); // calib must be >= 1
    CHECK_THROWS_AS(split(d, SplitSpec{0, 5, 5, 0}), DataError);  // train must be >= 1
}

TEST_CASE("split: paper-scale spec sizes come back exactly") {
    Dataset d;
    d.feature_names = {"a"};
    d.label_names = {"p", "q"};
    d.features = Eigen::MatrixXd::Zero(20867, 1);
    d.labels.assign(20867, 1);
    for (std::size_t i = 0; i < d.labels.size(); i += 2) d.labels[i] = 2;
    SplitResult r = split(d, SplitSpec{6954, 3476, 10437, 1});
    CHECK(r.train.row_count() == 6954);
    CHECK(r.calib.row_count() == 3476);
    CHECK(r.test.row_count() == 10437);
}

TEST_CASE("fit_normalizer: mean/std per column, sample denominator") {
    Dataset d;
    d.feature_names = {"a", "b"};
    d.label_names = {"p", "q"};
    d.features.resize(3, 2);
    d.features << 1, 5, 2, 5, 3, 5;
    d.labels = {1, 2, 1};
    Normalizer n = fit_normalizer(d);
    CHECK(n.means(0) == doctest::Approx(2.0));
    CHECK(n.stds(0) == doctest::Approx(1.0)); // sample std of {1,2,3}
    CHECK(n.means(1) == doctest::Approx(5.0));
    CHECK(n.stds(1) == 0.0); // constant column flagged by zero
}

TEST_CASE("fit_normalizer: self-normalization leaves near-zero means") {
    std::srand(9);
    Dataset d;
    d.label_names = {"p", "q"};
    for (int j = 0; j < 5; ++j) d.feature_names.push_back("f" + std::to_string(j));
    d.features = Eigen::MatrixXd::Random(100, 5) * 7.0;
    d.labels.assign(100, 1);
    d.labels[0] = 2;
    Normalizer n = fit_normalizer(d);
    Dataset z = apply_normalizer(n, d);
    for (Eigen::Index j = 0; j < 5; ++j) {
        CHECK(std::abs(z.features.col(j).mean()) < 1e-9);
        // recompute the sample std of the normalized column; should be 1
        double mean = z.features.col(j).mean();
        double ss = (z.features.col(j).array() - mean).square().sum() / 99.0;
        CHECK(std::sqrt(ss) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("fit_normalizer: errors on empty or still-missing data") {
    Dataset empty;
    CHECK_THROWS_AS(fit_normalizer(empty), DataError);

    Dataset d;
    d.feature_names = {"a"};
    d.label_names = {"p", "q"};
    d.features.resize(2, 1);
    d.features << 1, std::nan("");
    d.labels = {1, 2};
    CHECK_THROWS_AS(fit_normalizer(d), DataError);
}

TEST_CASE("apply_normalizer: value 3 under mean 2 std 1 becomes 1; round trip") {
    Dataset d;
    d.feature_names = {"a"};
    d.label_names = {"p", "q"};
    d.features.resize(1, 1);
    d.features << 3;
    d.labels = {1};
    Normalizer n;
    n.means.resize(1);
    n.stds.resize(1);
    n.means << 2;
    n.stds << 1;
    Dataset z = apply_normalizer(n, d);
    CHECK(z.features(0, 0) == 1.0);

    // round trip x' * std + mean recovers inputs
    Dataset wide;
    wide.feature_names = {"a", "b"};
    wide.label_names = {"p", "q"};
    wide.features = Eigen::MatrixXd::Random(20, 2) * 3.0;
    wide.labels.assign(20, 1);
    Normalizer nw = fit_normalizer(wide);
    Dataset zw = apply_normalizer(nw, wide);
    for (Eigen::Index i = 0; i < 20; ++i) {
        for (Eigen::Index j = 0; j < 2; ++j) {
            const double back = zw.features(i, j) * nw.stds(j) + nw.means(j);
            CHECK(back == doctest::Approx(wide.features(i, j)).epsilon(1e-12));
        }
    }
}

TEST_CASE("apply_normalizer: shifted test columns keep a nonzero mean") {
    Dataset train;
    train.feature_names = {"a"};
    train.label_names = {"p", "q"};
    train.features.resize(4, 1);
    train.features << -1, 0, 0, 1;
    train.labels = {1, 2, 1, 2};
    Normalizer n = fit_normalizer(train);

    Dataset test = train;
    test.features.array() += 10.0; // same shape, moved distribution
    Dataset z = apply_normalizer(n, test);
    CHECK(z.features.col(0).mean() > 5.0); // no re-centering on test data
}

TEST_CASE("apply_normalizer: dimension mismatch errors") {
    Dataset d;
    d.feature_names = {"a", "b"};
    d.label_names = {"p", "q"};
    d.features.resize(1, 2);
    d.features << 1, 2;
    d.labels = {1};
    Normalizer n;
    n.means.resize(1);
    n.stds.resize(1);
    n.means << 0;
    n.stds << 1;
    CHECK_THROWS_AS(apply_normalizer(n, d), DataError);
}

TEST_CASE("add_intercept: appends ones, errors when repeated, excluded from normalizer") {
    Dataset d;
    d.feature_names = {"a", "b"};
    d.label_names = {"p", "q"};
    d.features.resize(3, 2);
    d.features << 1, 2, 3, 4, 5, 6;
    d.labels = {1, 2, 1};
    Dataset with = add_intercept(d);
    CHECK(with.feature_count() == 3);
    CHECK(with.has_intercept);
    CHECK(with.features.col(2) == Eigen::VectorXd::Ones(3));
    CHECK(with.feature_names.back() == "intercept");
    CHECK_THROWS_AS(add_intercept(with), DataError);

    // fitting after add_intercept stores the identity transform for that column
    Normalizer n = fit_normalizer(with);
    CHECK(n.means(2) == 0.0);
    CHECK(n.stds(2) == 1.0);
    Dataset z = apply_normalizer(n, with);
    CHECK(z.features.col(2) == Eigen::VectorXd::Ones(3));
}

TEST_CASE("read_csv_table and numeric_column: schema-driven access") {
    auto path = temp_csv("table.csv", "a,b,y\n1,2,p\n,NA,q\n");
    CsvTable t = read_csv_table(path);
    CHECK(t.header.size() == 3);
    CHECK(t.rows.size() == 2);
    CHECK(t.column_index("b") == 1);
    CHECK(t.column_index("nope") == 3);
    Eigen::VectorXd col = numeric_column(t, 0);
    CHECK(col(0) == 1.0);
    CHECK(std::isnan(col(1)));
    Eigen::VectorXd colb = numeric_column(t, 1);
    CHECK(std::isnan(colb(1)));
}
