#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "semcom/config.hpp"

using namespace semcom;
namespace fs = std::filesystem;

TEST_CASE("empty text yields the documented defaults") {
  ExperimentConfig c = parse_config("");
  CHECK(c.dataset == DatasetName::synthetic);
  CHECK(c.latent_dim == 32);
  CHECK(c.w_sem == 1.0);
  CHECK(c.w_mse == 5.0);
  CHECK(c.w_ssim == 1.0);
  CHECK(c.w_p == 0.0);
  CHECK(c.train_snr_low_db == -5.0);
  CHECK(c.train_snr_high_db == 15.0);
  CHECK(c.eve_snr_low_db == -5.0);
  CHECK(c.eve_snr_high_db == 10.0);
  CHECK(c.eval_snr_list_db == std::vector<double>{-5.0, 0.0, 5.0, 10.0});
  CHECK(c.batch_size == 64);
  CHECK(!c.perturbation);
}

TEST_CASE("serialize -> parse round trip is the identity") {
  ExperimentConfig c = parse_config(
      "dataset=mnist latent_dim=256 w_p=10 epochs=7 seed=99\n"
      "eval_snr_list_db=-5,0,5 perturb.method=pgd perturb.steps=10 perturb.epsilon=0.2");
  ExperimentConfig c2 = parse_config(serialize_config(c));
  CHECK(serialize_config(c2) == serialize_config(c));
  CHECK(config_hash(c2) == config_hash(c));
  CHECK(c2.perturbation->steps == 10);
}

TEST_CASE("comments and blank lines are ignored") {
  ExperimentConfig c = parse_config("# a comment\n\nlatent_dim=8 # trailing\n");
  CHECK(c.latent_dim == 8);
}

TEST_CASE("unknown keys and malformed tokens are rejected") {
  CHECK_THROWS_AS(parse_config("latent=8"), ConfigError);
  CHECK_THROWS_AS(parse_config("latent_dim 8"), ConfigError);
  CHECK_THROWS_AS(parse_config("latent_dim=abc"), ConfigError);
}

TEST_CASE("domain validation") {
  CHECK_THROWS_AS(parse_config("latent_dim=0"), ConfigError);
  CHECK_THROWS_AS(parse_config("w_p=-1"), ConfigError);
  CHECK_THROWS_AS(parse_config("train_snr_low_db=5 train_snr_high_db=0"), ConfigError);
  CHECK_THROWS_AS(parse_config("dropout_cls=1"), ConfigError);
  // fgsm is single-step by definition
  CHECK_THROWS_AS(parse_config("perturb.method=fgsm perturb.steps=3"), ConfigError);
  CHECK_NOTHROW(parse_config("perturb.method=pgd perturb.steps=10"));
}

TEST_CASE("pgd step size defaults to epsilon/4 when alpha is unset") {
  ExperimentConfig c = parse_config("perturb.method=pgd perturb.epsilon=0.4");
  CHECK(c.perturbation->step_size == doctest::Approx(0.1));
  ExperimentConfig c2 =
      parse_config("perturb.method=pgd perturb.epsilon=0.4 perturb.alpha=0.05");
  CHECK(c2.perturbation->step_size == 0.05);
}

TEST_CASE("apply_override behaves like re-parsing with last writer wins") {
  ExperimentConfig c = parse_config("latent_dim=8");
  apply_override(c, "latent_dim", "16");
  apply_override(c, "perturb.method", "pgd");
  apply_override(c, "perturb.steps", "4");
  CHECK(c.latent_dim == 16);
  CHECK(c.perturbation->steps == 4);
  CHECK_THROWS_AS(apply_override(c, "no_such_key", "1"), ConfigError);
}

TEST_CASE("config hash is sensitive to values and stable across key order") {
  ExperimentConfig a = parse_config("latent_dim=8 epochs=2");
  ExperimentConfig b = parse_config("epochs=2 latent_dim=8");
  ExperimentConfig c = parse_config("latent_dim=8 epochs=3");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("create_run persists the resolved config before compute") {
  fs::path out = fs::temp_directory_path() / "semcom_test_runs";
  fs::remove_all(out);
  ExperimentConfig c = parse_config("latent_dim=4 epochs=1");
  RunRecord r = create_run(c, out.string(), "unit");
  CHECK(fs::exists(fs::path(r.run_dir) / "config"));
  CHECK(fs::exists(fs::path(r.run_dir) / "checkpoints"));
  ExperimentConfig back = load_config((fs::path(r.run_dir) / "config").string());
  CHECK(config_hash(back) == config_hash(c));
  // a second run with the same tag+config gets a distinct directory
  RunRecord r2 = create_run(c, out.string(), "unit");
  CHECK(r2.run_dir != r.run_dir);
  fs::remove_all(out);
}
