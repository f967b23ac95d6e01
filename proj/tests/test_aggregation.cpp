#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "polyfreg/aggregation.hpp"
#include "polyfreg/errors.hpp"
#include "polyfreg/funcdata.hpp"
#include "polyfreg/model_eval.hpp"
#include "polyfreg/mp_solver.hpp"
#include "test_util.hpp"

using namespace polyfreg;

namespace {

std::shared_ptr<const Dataset> shared(Dataset d) {
  return std::make_shared<const Dataset>(std::move(d));
}

std::shared_ptr<const PolyModel> fit_shared(std::shared_ptr<const Dataset> d,
                                            const GramMatrix& g,
                                            std::vector<double> lambda) {
  return std::make_shared<const PolyModel>(fit(std::move(d), g,
                                               LambdaVector{std::move(lambda)}));
}

Eigen::MatrixXd prediction_matrix(
    const std::vector<std::shared_ptr<const PolyModel>>& models,
    const GramMatrix& g) {
  Eigen::MatrixXd p(models.size(), g.size());
  for (size_t r = 0; r < models.size(); ++r) {
    p.row(static_cast<Eigen::Index>(r)) = predict_training(*models[r], g);
  }
  return p;
}

}  // namespace

TEST_CASE("build_gram_tilde examples") {
  Eigen::MatrixXd ones(1, 5);
  ones.setOnes();
  const Eigen::MatrixXd g1 = build_gram_tilde(ones);
  REQUIRE(g1.rows() == 1);
  CHECK(g1(0, 0) == 1.0);

  Eigen::MatrixXd orth(2, 4);
  orth << 1, 1, 0, 0,
          0, 0, 1, -1;
  const Eigen::MatrixXd g2 = build_gram_tilde(orth);
  CHECK(g2(0, 1) == 0.0);
  CHECK(g2(1, 0) == 0.0);
  CHECK(g2(0, 0) == doctest::Approx(0.5).epsilon(1e-15));

  Eigen::MatrixXd dup(2, 3);
  dup << 1, 2, 3,
         1, 2, 3;
  const Eigen::MatrixXd g3 = build_gram_tilde(dup);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g3);
  CHECK(es.eigenvalues()[0] <= 1e-12 * g3.norm());  // rank 1
  CHECK(es.eigenvalues()[0] >= -1e-10 * g3.norm()); // still PSD

  CHECK_THROWS_AS(build_gram_tilde(Eigen::MatrixXd()), InvalidArgumentError);
}

TEST_CASE("build_g_tilde examples") {
  Eigen::MatrixXd p(1, 3);
  p << 2, -1, 0.5;

  Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
  CHECK(build_g_tilde(p, zero).cwiseAbs().maxCoeff() == 0.0);

  Eigen::VectorXd y(3);
  y << 2, -1, 0.5;
  CHECK(build_g_tilde(p, y)[0] ==
        doctest::Approx(y.squaredNorm() / 3.0).epsilon(1e-15));

  Eigen::MatrixXd pc(1, 2);
  pc << 1, 1;
  Eigen::VectorXd yc(2);
  yc << 1, -1;
  CHECK(build_g_tilde(pc, yc)[0] == 0.0);

  Eigen::VectorXd wrong(2);
  wrong << 1, 2;
  CHECK_THROWS_AS(build_g_tilde(p, wrong), DataShapeError);
}

TEST_CASE("single-model aggregation is the scalar least-squares coefficient") {
  Dataset d = testutil::random_cosine_dataset(70, 5, 128);
  const auto ptr = shared(std::move(d));
  const GramMatrix g = gram(*ptr);
  const auto m = fit_shared(ptr, g, {1e-2, 1e-2, 1e-2});

  const AggregatedModel agg = aggregate({m}, *ptr);
  REQUIRE(agg.coefficients.size() == 1);

  const Eigen::VectorXd pred = predict_training(*m, g);
  const double expected = ptr->responses.dot(pred) / pred.squaredNorm();
  CHECK(agg.coefficients[0] == doctest::Approx(expected).epsilon(1e-12));

  Dataset probe = testutil::random_cosine_dataset(71, 1, 128);
  const FunctionalSample& x = probe.samples[0];
  CHECK(predict_aggregated(agg, x) ==
        doctest::Approx(agg.coefficients[0] * predict(*m, x)).epsilon(1e-14));
}

TEST_CASE("duplicate models take the ridge path but predict like one model") {
  Dataset d = testutil::random_cosine_dataset(72, 5, 128);
  const auto ptr = shared(std::move(d));
  const GramMatrix g = gram(*ptr);
  const auto m = fit_shared(ptr, g, {1e-4, 1e-4, 1e-4});

  const AggregatedModel one = aggregate({m}, *ptr);
  const AggregatedModel two = aggregate({m, m}, *ptr);
  CHECK(two.ridge_used > 0.0);
  CHECK(two.gram_tilde_condition >= 1e10);

  for (std::uint64_t s = 80; s < 84; ++s) {
    Dataset probe = testutil::random_cosine_dataset(s, 1, 128);
    const FunctionalSample& x = probe.samples[0];
    const double a = predict_aggregated(one, x);
    const double b = predict_aggregated(two, x);
    CHECK(a == doctest::Approx(b).epsilon(1e-6));
  }
}

TEST_CASE("all-zero base models cannot be aggregated") {
  Dataset d = testutil::random_cosine_dataset(73, 4, 64);
  const auto ptr = shared(std::move(d));
  auto zero = std::make_shared<PolyModel>();
  zero->order = 2;
  zero->intercept = 0.0;
  zero->coeffs = Eigen::MatrixXd::Zero(2, ptr->size());
  zero->training_ref = ptr;
  CHECK_THROWS_AS(aggregate({zero, zero}, *ptr), DegenerateAggregationError);
  CHECK_THROWS_AS(aggregate({}, *ptr), InvalidArgumentError);
}

TEST_CASE("the aggregate dominates every base model on training risk") {
  Dataset d = testutil::random_cosine_dataset(74, 8, 128);
  const auto ptr = shared(std::move(d));
  const GramMatrix g = gram(*ptr);
  std::vector<std::shared_ptr<const PolyModel>> models = {
      fit_shared(ptr, g, {1e-6, 1e-6, 1e-6}),
      fit_shared(ptr, g, {1e-3, 1e-3, 1e-3}),
      fit_shared(ptr, g, {1e-1, 1e-1, 1e-1}),
      fit_shared(ptr, g, {1.0, 1.0, 1.0}),
  };
  const AggregatedModel agg = aggregate(models, *ptr);

  const Eigen::MatrixXd p = prediction_matrix(models, g);
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    best = std::min(best, empirical_risk(p.row(r).transpose(), ptr->responses));
  }
  const Eigen::VectorXd agg_pred = p.transpose() * agg.coefficients;
  const double agg_risk = empirical_risk(agg_pred, ptr->responses);
  CHECK(agg_risk <= best + 1e-8 * (1.0 + best));
}

TEST_CASE("rescaling one base model rescales only its weight") {
  Dataset d = testutil::random_cosine_dataset(75, 6, 128);
  const auto ptr = shared(std::move(d));
  const GramMatrix g = gram(*ptr);
  const auto a = fit_shared(ptr, g, {1e-6, 1e-6, 1e-6});
  const auto b = fit_shared(ptr, g, {1e2, 1e2, 1e2});

  // scale model b by a power of two: predictions scale exactly
  const double t = 4.0;
  auto b_scaled = std::make_shared<PolyModel>(*b);
  b_scaled->intercept *= t;
  b_scaled->coeffs *= t;

  const AggregatedModel plain = aggregate({a, b}, *ptr);
  const AggregatedModel scaled = aggregate({a, b_scaled}, *ptr);
  REQUIRE(plain.ridge_used == 0.0);  // property holds on the plain path only
  REQUIRE(scaled.ridge_used == 0.0);

  CHECK(scaled.coefficients[0] ==
        doctest::Approx(plain.coefficients[0]).epsilon(1e-9));
  CHECK(scaled.coefficients[1] ==
        doctest::Approx(plain.coefficients[1] / t).epsilon(1e-9));

  Dataset probe = testutil::random_cosine_dataset(76, 1, 128);
  const FunctionalSample& x = probe.samples[0];
  CHECK(predict_aggregated(scaled, x) ==
        doctest::Approx(predict_aggregated(plain, x)).epsilon(1e-9));
}

TEST_CASE("permuting the model list permutes the weights") {
  Dataset d = testutil::random_cosine_dataset(77, 6, 128);
  const auto ptr = shared(std::move(d));
  const GramMatrix g = gram(*ptr);
  const auto a = fit_shared(ptr, g, {1e-6, 1e-6, 1e-6});
  const auto b = fit_shared(ptr, g, {1e-2, 1e-2, 1e-2});
  const auto c = fit_shared(ptr, g, {1e1, 1e1, 1e1});

  const AggregatedModel fwd = aggregate({a, b, c}, *ptr);
  const AggregatedModel rev = aggregate({c, b, a}, *ptr);
  CHECK(fwd.coefficients[0] == doctest::Approx(rev.coefficients[2]).epsilon(1e-12));
  CHECK(fwd.coefficients[1] == doctest::Approx(rev.coefficients[1]).epsilon(1e-12));
  CHECK(fwd.coefficients[2] == doctest::Approx(rev.coefficients[0]).epsilon(1e-12));
}

TEST_CASE("combine_representer reproduces the aggregate as one model") {
  Dataset d = testutil::random_cosine_dataset(78, 6, 128);
  const auto ptr = shared(std::move(d));
  const GramMatrix g = gram(*ptr);
  std::vector<std::shared_ptr<const PolyModel>> models = {
      fit_shared(ptr, g, {1e-5, 1e-5, 1e-5}),
      fit_shared(ptr, g, {1e-2, 1e-2, 1e-2}),
      fit_shared(ptr, g, {1e0, 1e0, 1e0}),
  };
  const AggregatedModel agg = aggregate(models, *ptr);
  const PolyModel combined = combine_representer(agg);
  CHECK(combined.order == 2);
  CHECK(combined.sample_count() == ptr->size());

  for (std::uint64_t s = 90; s < 95; ++s) {
    Dataset probe = testutil::random_cosine_dataset(s, 1, 128);
    const FunctionalSample& x = probe.samples[0];
    const double direct = predict_aggregated(agg, x);
    const double via_combined = predict(combined, x);
    CHECK(via_combined == doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("aggregation report lists every model plus an AGG footer") {
  Dataset d = testutil::random_cosine_dataset(79, 5, 64);
  const auto ptr = shared(std::move(d));
  const GramMatrix g = gram(*ptr);
  std::vector<std::shared_ptr<const PolyModel>> models = {
      fit_shared(ptr, g, {1e-4, 1e-4, 1e-4}),
      fit_shared(ptr, g, {1e-1, 1e-1, 1e-1}),
  };
  const AggregatedModel agg = aggregate(models, *ptr);
  const Eigen::MatrixXd p = prediction_matrix(models, g);

  const auto path =
      (std::filesystem::temp_directory_path() / "polyfreg_agg_report.csv").string();
  save_aggregation_report_csv(agg, p, ptr->responses, path);

  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  REQUIRE(lines.size() == 4);  // header + 2 models + AGG
  CHECK(lines[0] == "model_index,lambda0,lambda1,lambda2,c_tilde,train_risk");
  CHECK(lines[3].rfind("AGG,", 0) == 0);

  // every row has the same number of cells as the header
  const auto cells = [](const std::string& s) {
    return std::count(s.begin(), s.end(), ',');
  };
  for (const auto& line : lines) CHECK(cells(line) == cells(lines[0]));

  bool saw_condition = false;
  bool saw_ridge = false;
  std::ifstream meta(path + ".meta");
  for (std::string line; std::getline(meta, line);) {
    if (line.rfind("gram_tilde_condition", 0) == 0) saw_condition = true;
    if (line.rfind("ridge_used", 0) == 0) saw_ridge = true;
  }
  CHECK(saw_condition);
  CHECK(saw_ridge);
  std::filesystem::remove(path);
  std::filesystem::remove(path + ".meta");
}
