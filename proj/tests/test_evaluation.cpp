#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "semcom/evaluation.hpp"
#include "semcom/perturbation.hpp"
#include "semcom/training.hpp"

using namespace semcom;
namespace fs = std::filesystem;

namespace {

struct Fixture {
  ExperimentConfig cfg;
  LabeledImageSet test;
  ModelBundle bundle;

  Fixture() {
    cfg = parse_config("latent_dim=8 batch_size=16 w_ssim=0 n_real=2");
    RandomStreams st(201);
    test = make_synthetic(32, {8, 8, 1}, 4, st.get("data"));
    bundle = build_bundle(cfg, test.shape, test.num_classes, st);
  }
};

}  // namespace

TEST_CASE("eval_at_snr returns finite, consistent metrics") {
  Fixture f;
  RandomStreams st(202);
  EvalMetrics m = eval_at_snr(f.bundle, f.test, 10.0, 10.0, 2, st, f.cfg.batch_size);
  CHECK(m.bob_acc >= 0.0);
  CHECK(m.bob_acc <= 1.0);
  CHECK(m.eve_acc >= 0.0);
  CHECK(m.eve_acc <= 1.0);
  CHECK(std::isfinite(m.bob_cce));
  CHECK(std::isfinite(m.eve_cce));
  CHECK(m.mse > 0.0);
  CHECK(m.psnr_db == doctest::Approx(10.0 * std::log10(1.0 / m.mse)));
  CHECK(m.ssim == 0.0);  // images below the 11x11 window: ssim reported as 0
}

TEST_CASE("eval is deterministic per seed") {
  Fixture f;
  RandomStreams a(203), b(203);
  EvalMetrics ma = eval_at_snr(f.bundle, f.test, 5.0, 0.0, 2, a, f.cfg.batch_size);
  EvalMetrics mb = eval_at_snr(f.bundle, f.test, 5.0, 0.0, 2, b, f.cfg.batch_size);
  CHECK(ma.bob_acc == mb.bob_acc);
  CHECK(ma.mse == mb.mse);
}

TEST_CASE("identity_noiseless is an upper bound over harsh channels for mse") {
  Fixture f;
  RandomStreams a(204), b(204);
  EvalMetrics clean =
      eval_at_snr(f.bundle, f.test, 0.0, 0.0, 4, a, f.cfg.batch_size, true);
  EvalMetrics noisy =
      eval_at_snr(f.bundle, f.test, -5.0, -5.0, 4, b, f.cfg.batch_size, false);
  CHECK(std::isfinite(clean.mse));
  // identity channel repeats identically across realizations
  RandomStreams c(999);
  EvalMetrics clean2 =
      eval_at_snr(f.bundle, f.test, 0.0, 0.0, 1, c, f.cfg.batch_size, true);
  CHECK(clean.mse == doctest::Approx(clean2.mse).epsilon(1e-6));
  (void)noisy;
}

TEST_CASE("evaluate produces one row per SNR with gap = bob - eve") {
  Fixture f;
  RandomStreams st(205);
  EvalReport rep =
      evaluate(f.bundle, f.test, {-5.0, 0.0, 5.0}, 1, st, f.cfg);
  REQUIRE(rep.rows.size() == 3);
  for (const auto& r : rep.rows) {
    CHECK(r.dataset == "synthetic");
    CHECK(r.latent_dim == 8);
    CHECK(r.bob_snr_db == r.eve_snr_db);
    CHECK(r.gap == doctest::Approx(r.bob_acc - r.eve_acc));
    CHECK(r.n_samples == 32);
  }
}

TEST_CASE("gap_sweep requires trained eves and fixes bob's snr") {
  Fixture f;
  RandomStreams st(206);
  std::vector<std::pair<double, ModelBundle*>> by_wp{{0.0, &f.bundle}};
  CHECK_THROWS_AS(
      (void)gap_sweep(by_wp, f.test, {0.0}, 1, st, f.cfg, 10.0), ContractViolation);
  f.bundle.eve_trained = true;
  EvalReport rep = gap_sweep(by_wp, f.test, {-5.0, 0.0}, 1, st, f.cfg, 10.0);
  REQUIRE(rep.rows.size() == 2);
  for (const auto& r : rep.rows) {
    CHECK(r.bob_snr_db == 10.0);
    CHECK(r.w_p == 0.0);
  }
}

TEST_CASE("fidelity_penalty rejects mismatched bundles") {
  Fixture f;
  RandomStreams st(207);
  ExperimentConfig other = f.cfg;
  other.latent_dim = 4;
  ModelBundle small = build_bundle(other, f.test.shape, f.test.num_classes, st);
  CHECK_THROWS_AS(
      (void)fidelity_penalty(f.bundle, small, f.test, 10.0, st, 16, 1),
      ContractViolation);
  // a bundle against itself has zero penalty by symmetry of the draws? the
  // draws differ, but the value must at least be finite and small for an
  // identical pair evaluated back to back
  FidelityPenalty pen = fidelity_penalty(f.bundle, f.bundle, f.test, 10.0, st, 16, 4);
  CHECK(std::isfinite(pen.delta_psnr_db));
  CHECK(std::abs(pen.delta_psnr_db) < 3.0);
}

TEST_CASE("report csv round trips through export/import") {
  EvalReport rep;
  EvalRow r;
  r.dataset = "synthetic";
  r.latent_dim = 8;
  r.w_p = 10.0;
  r.perturb = "pgd-10";
  r.eve_snr_db = -5.0;
  r.bob_snr_db = 10.0;
  r.bob_acc = 0.9125;
  r.eve_acc = 0.3;
  r.gap = 0.6125;
  r.psnr_db = 17.25;
  r.ssim = 0.61;
  r.n_samples = 160;
  r.n_real = 8;
  r.seed = 123456789;
  rep.rows.push_back(r);

  fs::path p = fs::temp_directory_path() / "semcom_report_test.csv";
  export_report(rep, p.string());

  std::ifstream f(p);
  std::string header;
  std::getline(f, header);
  CHECK(header ==
        "dataset,latent_dim,w_P,perturb,eve_snr_db,bob_snr_db,bob_acc,eve_acc,gap,"
        "psnr_db,ssim,n_samples,n_real,seed");

  EvalReport back = import_report(p.string());
  REQUIRE(back.rows.size() == 1);
  const EvalRow& b = back.rows[0];
  CHECK(b.dataset == r.dataset);
  CHECK(b.latent_dim == r.latent_dim);
  CHECK(b.w_p == r.w_p);
  CHECK(b.perturb == r.perturb);
  CHECK(b.bob_acc == doctest::Approx(r.bob_acc).epsilon(1e-9));
  CHECK(b.gap == doctest::Approx(r.gap).epsilon(1e-9));
  CHECK(b.seed == r.seed);
  fs::remove(p);
}

TEST_CASE("export rejects empty reports; import rejects malformed rows") {
  EvalReport empty;
  fs::path p = fs::temp_directory_path() / "semcom_report_bad.csv";
  CHECK_THROWS_AS(export_report(empty, p.string()), ContractViolation);
  {
    std::ofstream f(p);
    f << "dataset,latent_dim\nsynthetic,8,extra\n";
  }
  CHECK_THROWS_AS((void)import_report(p.string()), IoError);
  fs::remove(p);
}

TEST_CASE("plot_report writes one svg per metric") {
  EvalReport rep;
  for (double wp : {0.0, 10.0})
    for (double snr : {-5.0, 0.0, 5.0, 10.0}) {
      EvalRow r;
      r.dataset = "synthetic";
      r.latent_dim = 8;
      r.w_p = wp;
      r.eve_snr_db = snr;
      r.bob_snr_db = 10.0;
      r.bob_acc = 0.9;
      r.eve_acc = wp > 0 ? 0.2 : 0.8;
      r.gap = r.bob_acc - r.eve_acc;
      r.psnr_db = 18.0;
      r.ssim = 0.7;
      r.n_samples = 160;
      r.n_real = 4;
      rep.rows.push_back(r);
    }
  fs::path dir = fs::temp_directory_path() / "semcom_plot_test";
  fs::create_directories(dir);
  auto files = plot_report(rep, (dir / "fig").string());
  CHECK(files.size() == 5);
  for (const auto& f : files) {
    CHECK(fs::exists(f));
    std::ifstream in(f);
    std::string head;
    std::getline(in, head);
    CHECK(head.find("<svg") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("evaluate_with_jammer demands a trained eve") {
  Fixture f;
  RandomStreams st(208);
  CHECK_THROWS_AS((void)evaluate_with_jammer(f.bundle, zero_delta_fn(), f.test, {0.0},
                                             1, st, f.cfg),
                  ContractViolation);
  f.bundle.eve_trained = true;
  EvalReport rep =
      evaluate_with_jammer(f.bundle, zero_delta_fn(), f.test, {0.0, 10.0}, 1, st, f.cfg);
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.rows[0].perturb == "none");
}
