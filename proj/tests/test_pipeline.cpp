#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ewt/figures.hpp"
#include "ewt/io.hpp"
#include "ewt/pipeline.hpp"
#include "oracles.hpp"

using namespace ewt;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ewt_pipeline_tests" / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PipelineConfig small(const std::string& kernel, const std::string& mapper) {
  PipelineConfig c;
  c.toy.width = 64;
  c.toy.height = 64;
  c.toy.waves = 3;
  c.kernel = kernel;
  c.mapper = mapper;
  c.frame.discrete_radius = 1;
  c.frame.parseval_radius = 1;
  return c;
}

}  // namespace

TEST_CASE("config json round trip and validation") {
  PipelineConfig c = small("shannon", "star");
  c.scale_space.s0 = 0.6;
  c.mapping.smoothing = {0.4, 0.5};
  auto back = PipelineConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  CHECK_THROWS_AS(PipelineConfig::from_json({{"kernal", "gabor"}}), ValidationError);
  CHECK_THROWS_AS(PipelineConfig::from_json({{"toy", {{"seed", "x"}}}}), ValidationError);
  PipelineConfig bad;
  bad.mapper = "spline";
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = PipelineConfig{};
  bad.scale_space.s0 = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = PipelineConfig{};
  bad.toy.waves = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("constant image gives one region and exact reconstruction") {
  PipelineConfig c = small("gabor", "affine");
  auto r = run_pipeline(RealImage(32, 32, 3.0), c);
  CHECK(r.num_regions == 1);
  CHECK(r.modes.modes.size() == 1);
  CHECK(r.mse <= 1e-25);
}

TEST_CASE("toy pipeline bookkeeping") {
  for (const char* kernel : {"shannon", "gabor"}) {
    CAPTURE(kernel);
    auto r = run_pipeline(small(kernel, "affine"));
    CHECK(r.status == "ok");
    CHECK(r.modes.non_dc_count() == 6);
    CHECK(r.mse <= 1e-20);
    CHECK(r.zero_coverage == 0);
    double sum = 0;
    for (const auto& [n, e] : r.energies) sum += e;
    CHECK(sum == doctest::Approx(r.total_energy).epsilon(1e-9));
    CHECK(r.frame.A > 0.0);
  }
}

TEST_CASE("runs are reproducible byte for byte") {
  auto c = small("gabor", "demons");
  const fs::path da = scratch("a"), db = scratch("b");
  c.out = da.string();
  auto a = run_pipeline(c);
  c.out = db.string();
  auto b = run_pipeline(c);
  a.config["out"] = b.config["out"] = "";
  CHECK(report_to_json(a, false).dump() == report_to_json(b, false).dump());
  std::size_t compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(da)) {
    if (!e.is_regular_file() || e.path().filename() == "report.json") continue;
    CHECK(slurp(e.path()) == slurp(db / fs::relative(e.path(), da)));
    ++compared;
  }
  CHECK(compared > 20);
}

TEST_CASE("artifacts reload and figures agree with the report") {
  auto c = small("shannon", "affine");
  c.out = scratch("art").string();
  auto r = run_pipeline(c);
  const fs::path out = c.out;
  CHECK(fs::exists(out / "report.json"));
  CHECK_FALSE(fs::exists(out / "FAILED"));

  auto bank = load_bank(out / "filters");
  CHECK(bank.kind == BankKind::Symmetric);
  auto coeffs = load_coefficients(out / "coefficients", bank);
  auto rec = reconstruct(coeffs, dual_bank(bank));
  CHECK(mse(rec.image, read_ewt1_real(out / "input.ewt")) <= 1e-20);
  CHECK(read_ewt1_real(out / "reconstruction.ewt").data == rec.image.data);

  auto other = small("gabor", "affine");
  auto gabor = filter_stage(
      partition_stage(detect_stage(fft_forward(to_complex(load_input(other))), other), other),
      mapping_stage(partition_stage(detect_stage(fft_forward(to_complex(load_input(other))), other), other),
                    make_gabor_kernel(), other),
      make_gabor_kernel());
  CHECK_THROWS_AS(load_coefficients(out / "coefficients", build_symmetric_bank(gabor)), ValidationError);

  auto figs = read_json(out / "figures" / "figures.json");
  CHECK(figs["panels"].size() == r.energies.size());
  for (std::size_t k = 0; k < r.energies.size(); ++k) {
    CHECK(figs["panels"][k]["E"].get<double>() == r.energies[k].second);
    CHECK(figs["panels"][k]["label"] == energy_label(r.energies[k].first, r.energies[k].second));
    CHECK(fs::exists(out / "figures" / figs["panels"][k]["file"].get<std::string>()));
  }
  // overlay marks exactly the boundary samples
  auto det = detect_stage(fft_forward(to_complex(read_ewt1_real(out / "input.ewt"))), c);
  auto part = partition_stage(det, c);
  std::size_t boundary = 0;
  for (auto b : part.boundary.data) boundary += b ? 1 : 0;
  CHECK(count_marked(partition_overlay(det.log_spectrum, part)) == boundary);
  CHECK(figs["boundary_samples"] == boundary);
}

TEST_CASE("stage failures leave a marker") {
  PipelineConfig c = small("gabor", "demons");
  c.toy.width = 256;
  c.toy.height = 1;
  c.toy.waves = 2;
  c.out = scratch("fail").string();
  try {
    run_pipeline(c);
    FAIL("expected a failure");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("stage 'map'") != std::string::npos);
  }
  CHECK(fs::exists(fs::path(c.out) / "FAILED"));
  auto rep = read_json(fs::path(c.out) / "report.json");
  CHECK(rep["status"] == "failed");
  CHECK(rep["failure"]["stage"] == "map");

  c.input = (fs::path(c.out) / "missing.pgm").string();
  CHECK_THROWS_AS(run_pipeline(c), ValidationError);
}

TEST_CASE("1D pipeline with affine maps") {
  PipelineConfig c = small("shannon", "affine");
  c.toy.width = 512;
  c.toy.height = 1;
  c.toy.waves = 2;
  auto r = run_pipeline(c);
  CHECK(r.mse <= 1e-20);
  CHECK(r.modes.non_dc_count() == 4);
}
