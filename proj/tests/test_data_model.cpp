#include "wgain/data_model.hpp"

#include "wgain/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace wgain;

namespace {

Dataset small_dataset(Eigen::Index n, int q = 2) {
    Rng rng(42);
    VectorXd y(n);
    VectorXi d(n);
    MatrixXd z(n, q);
    for (Eigen::Index i = 0; i < n; ++i) {
        y[i] = rng.normal();
        d[i] = static_cast<int>(i % 2);
        for (int j = 0; j < q; ++j) z(i, j) = rng.normal();
    }
    return Dataset(std::move(y), std::move(d), std::move(z));
}

}  // namespace

TEST_CASE("fold plan sizes") {
    const FoldPlan even = make_fold_plan(10, 5, 0);
    for (int ell = 0; ell < 5; ++ell) CHECK(even.fold_size(ell) == 2);

    const FoldPlan uneven = make_fold_plan(11, 5, 0);
    std::multiset<int> sizes;
    for (int ell = 0; ell < 5; ++ell) sizes.insert(uneven.fold_size(ell));
    CHECK(sizes == std::multiset<int>{2, 2, 2, 2, 3});
}

TEST_CASE("fold plans are deterministic") {
    const FoldPlan a = make_fold_plan(10, 5, 0);
    const FoldPlan b = make_fold_plan(10, 5, 0);
    CHECK(a.assignments == b.assignments);

    const FoldPlan c = make_fold_plan(10, 5, 1);
    CHECK(a.assignments != c.assignments);
}

TEST_CASE("fold plans partition the index set") {
    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        const int L = 2 + static_cast<int>(rng.uniform_below(8));
        const Eigen::Index n = 2 * L + static_cast<Eigen::Index>(rng.uniform_below(200));
        const FoldPlan plan = make_fold_plan(n, L, rng.next_u64());

        CHECK(static_cast<Eigen::Index>(plan.assignments.size()) == n);
        int smallest = static_cast<int>(n), largest = 0;
        for (int ell = 0; ell < L; ++ell) {
            const int size = plan.fold_size(ell);
            CHECK(size > 0);
            smallest = std::min(smallest, size);
            largest = std::max(largest, size);
        }
        CHECK(largest - smallest <= 1);
        for (int a : plan.assignments) {
            CHECK(a >= 0);
            CHECK(a < L);
        }
    }
}

TEST_CASE("fold plan preconditions") {
    CHECK_THROWS_AS(make_fold_plan(10, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(make_fold_plan(9, 5, 0), std::invalid_argument);
}

TEST_CASE("validate_dataset accepts a clean dataset") {
    CHECK_NOTHROW(validate_dataset(small_dataset(100)));
}

TEST_CASE("validate_dataset reports the offending row") {
    Dataset ds = small_dataset(10);
    VectorXd y = ds.y();
    y[7] = std::nan("");
    const Dataset broken(std::move(y), VectorXi(ds.d()), MatrixXd(ds.z()));
    CHECK_THROWS_WITH_AS(validate_dataset(broken),
                         doctest::Contains("row 7"), data_error);
}

TEST_CASE("validate_dataset rejects a single-arm design") {
    Dataset ds = small_dataset(10);
    const Dataset all_treated(VectorXd(ds.y()), VectorXi::Ones(10), MatrixXd(ds.z()));
    CHECK_THROWS_AS(validate_dataset(all_treated), data_error);
}

TEST_CASE("validate_dataset rejects out-of-domain treatments") {
    Dataset ds = small_dataset(6);
    VectorXi d = ds.d();
    d[2] = 2;
    const Dataset bad(VectorXd(ds.y()), std::move(d), MatrixXd(ds.z()));
    CHECK_THROWS_AS(validate_dataset(bad), data_error);
}

TEST_CASE("dataset construction from observations") {
    std::vector<Observation> rows(3);
    for (int i = 0; i < 3; ++i) {
        rows[i].y = i;
        rows[i].d = i % 2;
        rows[i].z = VectorXd::Constant(2, 0.5 * i);
    }
    const Dataset ds(rows);
    CHECK(ds.n() == 3);
    CHECK(ds.q() == 2);
    CHECK(ds.row(2).y == 2.0);
    CHECK(ds.row(2).z[1] == 1.0);

    rows[1].z = VectorXd::Zero(3);
    CHECK_THROWS_AS(Dataset{rows}, data_error);
}
