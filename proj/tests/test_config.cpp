#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "nch/config.hpp"
#include "nch/errors.hpp"
#include "nch/io.hpp"

using namespace nch;
namespace fs = std::filesystem;

namespace {

// Expects a ConfigError naming `key` on `line` (0 = any line).
void expect_error(std::string_view text, const std::string& key, int line = 0,
                  const fs::path& base = {}) {
  try {
    parse_config(text, base);
    ADD_FAILURE() << "accepted: " << text;
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), key) << e.what();
    if (line > 0) EXPECT_EQ(e.line(), line) << e.what();
    EXPECT_NE(std::string(e.what()).find(key), std::string::npos);
  }
}

class ConfigFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("nch_cfg_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  void write(const fs::path& p, const std::string& text) { std::ofstream(dir_ / p) << text; }
  fs::path dir_;
};

}  // namespace

TEST(Config, EmptyTextGivesDefaults) {
  const RunConfig c = parse_config("");
  EXPECT_EQ(c, RunConfig{});
  EXPECT_EQ(c.grid_n, 32);
  EXPECT_EQ(c.scheme, Scheme::backward_euler);
  EXPECT_EQ(c.output_dir, "output");
}

TEST(Config, ParsesEveryKey) {
  const RunConfig c = parse_config(R"(
# a comment line
grid.N = 16          # trailing comment
grid.L = 2.5
model.epsilon = 3
model.kernel.type = gaussian
model.kernel.cJ = 0.5
model.kernel.xi = 20
model.kernel.images = 2
model.potential.type = truncated
model.potential.K = 1.5
model.CJ = 4
scheme.name = two_li
scheme.tau = 1e-3
scheme.S = 0.25
scheme.stability_policy = warn
solver.newton_tol = 1e-10
solver.newton_max_iter = 20
solver.krylov_tol = 1e-11
run.max_steps = 500
run.eq_tol = 1e-8
run.record_every = 10
run.snapshot_every = 100
run.seed = 18446744073709551615
run.init.mean = 0.1
run.init.delta = 0.01
output.dir = results/a
)");
  EXPECT_EQ(c.grid_n, 16);
  EXPECT_EQ(c.grid_l, 2.5);
  EXPECT_EQ(c.epsilon, 3.0);
  EXPECT_EQ(c.kernel_cj, 0.5);
  EXPECT_EQ(c.kernel_xi, 20.0);
  EXPECT_EQ(c.kernel_images, 2);
  EXPECT_EQ(c.potential_type, "truncated");
  EXPECT_EQ(c.potential_k, 1.5);
  ASSERT_TRUE(c.model_cj);
  EXPECT_EQ(*c.model_cj, 4.0);
  EXPECT_EQ(c.scheme, Scheme::two_li);
  EXPECT_EQ(c.tau, 1e-3);
  EXPECT_EQ(c.stabilization, 0.25);
  EXPECT_EQ(c.stability_policy, StabilityPolicy::warn);
  EXPECT_EQ(c.newton_tol, 1e-10);
  EXPECT_EQ(c.newton_max_iter, 20);
  EXPECT_EQ(c.krylov_tol, 1e-11);
  EXPECT_EQ(c.max_steps, 500);
  EXPECT_EQ(c.eq_tol, 1e-8);
  EXPECT_EQ(c.record_every, 10);
  EXPECT_EQ(c.snapshot_every, 100);
  EXPECT_EQ(c.seed, 18446744073709551615ull);
  EXPECT_EQ(c.init_mean, 0.1);
  EXPECT_EQ(c.init_delta, 0.01);
  EXPECT_EQ(c.output_dir, "results/a");

  const SchemeConfig s = scheme_config(c);
  EXPECT_EQ(s.potential, PotentialParams::truncated(1.5));
  EXPECT_EQ(s.cj, 4.0);
  const RunOptions o = run_options(c);
  EXPECT_EQ(o.max_steps, 500);
  EXPECT_EQ(o.record_every, 10);
}

TEST(Config, EmitIsIdempotent) {
  RunConfig c;
  c.grid_n = 8;
  c.tau = 0.1 + 0.2;  // not short in decimal
  c.kernel_type = "constant";
  c.kernel_cj = 2.0;
  c.potential_type = "truncated";
  c.potential_k = 1.1;
  c.model_cj = 3.0;
  c.scheme = Scheme::ssi1;
  c.stabilization = 1.0;
  const std::string once = emit_config(c);
  const RunConfig back = parse_config(once);
  EXPECT_EQ(back.tau, c.tau);
  EXPECT_EQ(emit_config(back), once);
  EXPECT_EQ(emit_config(parse_config(emit_config(RunConfig{}))), emit_config(RunConfig{}));
}

TEST(Config, RejectsUnknownDuplicateAndMalformed) {
  expect_error("grid.N = 8\ngrid.M = 3\n", "grid.M", 2);
  expect_error("grid.N = 8\n\ngrid.N = 16\n", "grid.N", 3);
  expect_error("grid.N = eight\n", "grid.N", 1);
  expect_error("grid.N = 8.5\n", "grid.N", 1);
  expect_error("scheme.tau = 0.1x\n", "scheme.tau", 1);
  expect_error("scheme.tau = nan\n", "scheme.tau", 1);
  expect_error("\n\nscheme.tau =\n", "scheme.tau", 3);
  expect_error("scheme.name = rk4\n", "scheme.name", 1);
  expect_error("scheme.stability_policy = strict\n", "scheme.stability_policy", 1);
  expect_error("model.kernel.type = newtonian\n", "model.kernel.type", 1);
  expect_error("run.seed = -1\n", "run.seed", 1);
  try {
    parse_config("just some words\n");
    ADD_FAILURE();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 1);
  }
}

TEST(Config, RejectsOutOfRangeValuesWithLine) {
  expect_error("grid.N = 1\n", "grid.N", 1);
  expect_error("grid.N = 100000\n", "grid.N", 1);
  expect_error("# c\nscheme.tau = -0.1\n", "scheme.tau", 2);
  expect_error("model.epsilon = 0\n", "model.epsilon", 1);
  expect_error("model.kernel.xi = 0\n", "model.kernel.xi", 1);
  expect_error("run.record_every = 0\n", "run.record_every", 1);
  expect_error("model.potential.type = truncated\nmodel.potential.K = 1\n", "model.potential.K",
               2);
  expect_error("solver.krylov_tol = 2\n", "solver.krylov_tol", 1);
}

TEST(Config, RejectsKeysOfOtherVariants) {
  expect_error("model.potential.K = 2\n", "model.potential.K", 1);
  expect_error("model.kernel.type = constant\nmodel.kernel.xi = 3\n", "model.kernel.xi", 2);
  expect_error("model.kernel.path = k.nchf\n", "model.kernel.path", 1);
}

TEST(Config, SchemePotentialConsistency) {
  // SSI1 needs the truncated potential.
  expect_error("scheme.name = ssi1\n", "model.potential.type");
  EXPECT_NO_THROW(parse_config(
      "scheme.name = ssi1\nmodel.potential.type = truncated\nmodel.potential.K = 2\n"));
}

TEST_F(ConfigFiles, LoadResolvesRelativePaths) {
  const GridGeometry g(4, 1.0);
  write_field(dir_ / "kernel.nchf", Field(g, 1.0), 0.0);
  write_field(dir_ / "init.nchf", Field(g, 0.3), 0.0);
  write(
      "run.cfg",
      "grid.N = 4\nmodel.epsilon = 1\nmodel.kernel.type = tabulated\n"
      "model.kernel.path = kernel.nchf\nrun.init.snapshot_path = init.nchf\n");
  const RunConfig c = load_config(dir_ / "run.cfg");
  EXPECT_EQ(c.resolve(c.kernel_path), dir_ / "kernel.nchf");
  const KernelParams params = kernel_params(c);
  ASSERT_TRUE(std::holds_alternative<TabulatedKernel>(params.shape));
  EXPECT_EQ(std::get<TabulatedKernel>(params.shape).values, std::vector<double>(16, 1.0));
  EXPECT_EQ(initial_field(c, g), Field(g, 0.3));
}

TEST_F(ConfigFiles, MissingFilesAreConfigErrors) {
  write("a.cfg", "model.kernel.type = tabulated\nmodel.kernel.path = nope.nchf\n");
  try {
    load_config(dir_ / "a.cfg");
    ADD_FAILURE();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "model.kernel.path");
    EXPECT_EQ(e.line(), 2);
  }
  write("b.cfg", "run.init.snapshot_path = nope.nchf\n");
  EXPECT_THROW(load_config(dir_ / "b.cfg"), ConfigError);
  EXPECT_THROW(load_config(dir_ / "absent.cfg"), ConfigError);
}

TEST_F(ConfigFiles, SnapshotGridMustMatch) {
  write_field(dir_ / "init.nchf", Field(GridGeometry(8, 1.0), 0.3), 0.0);
  write("c.cfg", "grid.N = 4\nrun.init.snapshot_path = init.nchf\n");
  const RunConfig c = load_config(dir_ / "c.cfg");
  EXPECT_THROW(initial_field(c, GridGeometry(4, 1.0)), ConfigError);
}

TEST(Config, SeededInitialFieldIsReproducible) {
  RunConfig c;
  c.grid_n = 8;
  c.seed = 12;
  c.init_mean = 0.2;
  const GridGeometry g(8, 1.0);
  EXPECT_EQ(initial_field(c, g), random_initial_field(g, 12, 0.2, 0.05));
}
