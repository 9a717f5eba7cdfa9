#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "exex/rng.hpp"
#include "exex/setgeom.hpp"
#include "toy_fixture.hpp"

using exex::CandidateSet;
using exex::DirectionalCache;
using exex::DirectionalRow;

TEST_CASE("directional distances of the hand-checked origin point") {
  CandidateSet set = toy::make_set();
  DirectionalRow row = exex::directional_nn(set, 2);  // the origin
  CHECK(row.minus[0] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(row.plus[0] == doctest::Approx(1.22).epsilon(1e-12));
  CHECK(row.minus[1] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(row.plus[1] == doctest::Approx(0.96).epsilon(1e-12));
  CHECK(row.radius() == doctest::Approx(1.22).epsilon(1e-12));
}

TEST_CASE("members on the splitting hyperplane belong to neither side") {
  CandidateSet set = toy::make_set();
  // Points 0 and 1 share x = 0.732, so each sees an empty positive-x
  // half-space (nothing lies strictly above its own x coordinate).
  DirectionalRow r0 = exex::directional_nn(set, 0);
  CHECK(std::isinf(r0.plus[0]));
  CHECK(std::isinf(r0.plus[1]));  // nothing above the top point either
  CHECK(r0.minus[1] == doctest::Approx(0.645).epsilon(1e-12));
  CHECK(r0.radius() == doctest::Approx(std::sqrt(2.438473)).epsilon(1e-12));

  DirectionalRow r1 = exex::directional_nn(set, 1);
  CHECK(std::isinf(r1.plus[0]));
  CHECK(r1.radius() == doctest::Approx(1.22).epsilon(1e-12));
}

TEST_CASE("empty half-spaces are excluded from the sparsity radius") {
  CandidateSet set(2);
  set.add(toy::pt(0, 0));
  DirectionalRow row = exex::directional_nn(set, 0);
  CHECK(std::isinf(row.minus[0]));
  CHECK(std::isinf(row.plus[0]));
  // All half-spaces empty: the radius degenerates to -infinity.
  CHECK(std::isinf(row.radius()));
  CHECK(row.radius() < 0);
}

TEST_CASE("the sparsest member is the hand-checked one") {
  CandidateSet set = toy::make_set();
  CHECK(exex::sparsest_index(set) == toy::kSparsest);
}

TEST_CASE("largest nearest-neighbor distance over the toy set") {
  CandidateSet set = toy::make_set();
  CHECK(exex::max_nn_distance(set) == doctest::Approx(toy::kMaxNn).epsilon(1e-12));
}

TEST_CASE("incremental directional cache tracks the recomputed answer") {
  CandidateSet set = toy::make_set();
  DirectionalCache cache(set);
  REQUIRE(cache.size() == set.size());

  exex::RngStream rng(404);
  for (int step = 0; step < 30; ++step) {
    Eigen::VectorXd x = toy::pt(rng.uniform(-2, 2), rng.uniform(-2, 2));
    int idx = set.add(x);
    cache.on_add(set, idx);

    REQUIRE(cache.size() == set.size());
    for (int i = 0; i < set.size(); ++i) {
      DirectionalRow fresh = exex::directional_nn(set, i);
      for (int k = 0; k < 2; ++k) {
        // Exact equality on purpose (it also handles the +inf slots): the
        // incremental update must reproduce the recomputed answer bit for bit.
        CHECK(cache.row(i).minus[k] == fresh.minus[k]);
        CHECK(cache.row(i).plus[k] == fresh.plus[k]);
      }
      CHECK(cache.radius(i) == fresh.radius());
    }
    CHECK(cache.sparsest() == exex::sparsest_index(set));
  }
}

TEST_CASE("principal components recover a planar cloud") {
  exex::RngStream rng(71);
  Eigen::Vector3d mean(1.0, 2.0, 3.0);
  Eigen::Vector3d u1 = Eigen::Vector3d(2, 1, 0).normalized();
  Eigen::Vector3d u2 = Eigen::Vector3d(-1, 2, 0).normalized();

  Eigen::MatrixXd pts(60, 3);
  for (int i = 0; i < 60; ++i) {
    pts.row(i) =
        (mean + rng.normal(0.0, 3.0) * u1 + rng.normal(0.0, 0.8) * u2)
            .transpose();
  }

  exex::PcaProjection proj = exex::pca_fit(pts, 2);
  REQUIRE(proj.k() == 2);

  // Orthonormal loading columns with the documented sign convention.
  Eigen::MatrixXd gram = proj.loadings.transpose() * proj.loadings;
  CHECK((gram - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
  for (int c = 0; c < 2; ++c) {
    int arg = 0;
    proj.loadings.col(c).cwiseAbs().maxCoeff(&arg);
    CHECK(proj.loadings(arg, c) > 0);
  }

  // The first component aligns with the dominant direction.
  CHECK(std::abs(proj.loadings.col(0).dot(u1)) > 0.99);
  CHECK(proj.explained_fractions.sum() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(proj.explained_fractions[0] > proj.explained_fractions[1]);

  // In-plane data reconstructs exactly from two components.
  for (int i = 0; i < 60; ++i) {
    Eigen::RowVectorXd z = proj.project(pts.row(i).transpose());
    Eigen::Vector3d rebuilt = proj.mean + proj.loadings * z.transpose();
    CHECK((rebuilt.transpose() - pts.row(i)).norm() < 1e-8);
  }

  // Batch projection agrees with the single-point path.
  Eigen::MatrixXd zs = proj.project_rows(pts);
  CHECK((zs.row(0) - proj.project(pts.row(0).transpose())).norm() < 1e-12);
}

TEST_CASE("achievable rank limits the component count") {
  exex::RngStream rng(72);
  Eigen::MatrixXd pts(40, 3);
  Eigen::Vector3d u1 = Eigen::Vector3d(1, 2, 2).normalized();
  Eigen::Vector3d u2 = Eigen::Vector3d(2, -2, 1).normalized();
  for (int i = 0; i < 40; ++i)
    pts.row(i) = (rng.normal() * u1 + rng.normal() * u2).transpose();

  CHECK(exex::pca_achievable_rank(pts) == 2);
  try {
    exex::pca_fit(pts, 3);
    FAIL("expected a rank complaint");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
  CHECK(exex::pca_fit_up_to(pts, 3).k() == 2);

  Eigen::MatrixXd degenerate = Eigen::MatrixXd::Ones(5, 3);
  // Identical rows are rejected upstream by the candidate set, but the
  // fitter still reports the degenerate case cleanly.
  CHECK_THROWS_AS(exex::pca_fit_up_to(degenerate, 2), std::invalid_argument);

  Eigen::MatrixXd single = Eigen::MatrixXd::Zero(1, 3);
  CHECK_THROWS_AS(exex::pca_fit(single, 1), std::invalid_argument);
}

TEST_CASE("orthant-based boundary test with hand-built patterns") {
  // A plus pattern: the four arms share a coordinate with the center, so
  // they land in no orthant of the center and it is classified boundary
  // despite being surrounded.
  Eigen::MatrixXd plus(5, 2);
  plus << 0, 0, 1, 0, -1, 0, 0, 1, 0, -1;
  CHECK(exex::is_boundary_in_coords(plus, 0, 1.5));

  // Four diagonal corners around the center: every orthant of the center
  // holds a corner at distance sqrt(2).
  Eigen::MatrixXd cross(5, 2);
  cross << 0, 0, 1, 1, 1, -1, -1, 1, -1, -1;
  CHECK_FALSE(exex::is_boundary_in_coords(cross, 0, 2.0));
  // ... but not within a radius shorter than sqrt(2).
  CHECK(exex::is_boundary_in_coords(cross, 0, 1.2));
  // A corner has three empty orthants of its own.
  CHECK(exex::is_boundary_in_coords(cross, 1, 2.0));
}

TEST_CASE("set-level boundary test matches the coordinate-level one") {
  CandidateSet set = toy::make_set();
  Eigen::MatrixXd coords = set.as_matrix();
  for (double r : {0.8, 1.0, 1.5, 3.0}) {
    for (int i = 0; i < set.size(); ++i) {
      CHECK(exex::is_boundary(set, i, r) ==
            exex::is_boundary_in_coords(coords, i, r));
    }
  }
}

TEST_CASE("boundary classification can run in projected coordinates") {
  exex::RngStream rng(73);
  CandidateSet set(4);
  for (int i = 0; i < 25; ++i) set.add(rng.normal_vector(4));

  exex::PcaProjection proj = exex::pca_fit_up_to(set, 3);
  REQUIRE(proj.k() == 3);
  Eigen::MatrixXd z = proj.project_rows(set.as_matrix());
  for (int i = 0; i < set.size(); ++i) {
    CHECK(exex::is_boundary(set, i, 1.5, &proj) ==
          exex::is_boundary_in_coords(z, i, 1.5));
  }
}
