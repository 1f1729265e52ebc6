#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "commands.hpp"

namespace {

using discoreset::cli::RunConfig;

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitValidation = 2;
constexpr int kExitColoring = 3;
constexpr int kExitIo = 4;
constexpr int kExitInternal = 5;

void add_common(CLI::App* cmd, RunConfig& c, std::string& replay) {
  cmd->add_option("--input", c.input, "points file (CSV or JSON array of arrays)")->envname("DISCORESET_INPUT");
  cmd->add_option("--output", c.output, "result JSON (stdout when omitted)")->envname("DISCORESET_OUTPUT");
  cmd->add_option("--dim", c.dim, "expected dimension")->envname("DISCORESET_DIM");
  cmd->add_option("--seed", c.seed, "64-bit seed")->envname("DISCORESET_SEED");
  cmd->add_option("--c0", c.c0, "grid width constant")->envname("DISCORESET_C0");
  cmd->add_option("--c1", c.c1, "grid threshold constant")->envname("DISCORESET_C1");
  cmd->add_option("--c-big,--c_big", c.c_big, "bound on |sum sigma|")->envname("DISCORESET_C_BIG");
  cmd->add_flag("--strict-constants,--strict_constants", c.strict_constants, "proof-faithful constants")
      ->envname("DISCORESET_STRICT_CONSTANTS");
  cmd->add_option("--retry-budget", c.retry_budget, "walk attempts per cell")->envname("DISCORESET_RETRY_BUDGET");
  cmd->add_option("--resolution", c.resolution, "query grid n_eff (width 1/n_eff)")->envname("DISCORESET_RESOLUTION");
  cmd->add_flag("--literal-width", c.literal_width, "query grid width 1/n")->envname("DISCORESET_LITERAL_WIDTH");
  cmd->add_option("--replay", replay, "rerun with the config embedded in an output artifact");
  cmd->set_config("--config");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian KDE coresets by discrepancy halving"};
  app.require_subcommand(1);
  RunConfig c;
  std::string replay;

  auto* build = app.add_subcommand("build", "build a coreset");
  add_common(build, c, replay);
  build->add_option("--target-size", c.target_size, "stop at the first size <= target")
      ->envname("DISCORESET_TARGET_SIZE");
  build->add_option("--epsilon", c.epsilon, "error level; target = ceil(c_q / eps)")->envname("DISCORESET_EPSILON");
  build->add_flag("--presample", c.presample, "uniform presample to ceil(c_s / eps^2) first")
      ->envname("DISCORESET_PRESAMPLE");
  build->add_option("--c-s", c.c_s, "presample constant")->envname("DISCORESET_C_S");
  build->add_option("--c-q", c.c_q, "coreset size constant")->envname("DISCORESET_C_Q");
  build->add_option("--emit-coloring", c.emit_coloring, "also write the first round's coloring");

  auto* eval = app.add_subcommand("eval", "L_inf error of a built coreset");
  add_common(eval, c, replay);
  eval->add_option("--coreset", c.coreset, "output of build")->envname("DISCORESET_CORESET");

  auto* bench = app.add_subcommand("bench", "discrepancy coreset vs random sampling");
  add_common(bench, c, replay);
  bench->add_option("--sizes", c.sizes, "coreset sizes")->delimiter(',')->envname("DISCORESET_SIZES");
  bench->add_option("--seeds", c.seeds, "number of seeded runs")->envname("DISCORESET_SEEDS");
  bench->add_option("--csv", c.csv, "also write a (method,size,median,q25,q75) table");

  auto* verify = app.add_subcommand("verify", "recheck a stored coloring against the grids");
  add_common(verify, c, replay);
  verify->add_option("--coloring", c.coloring, "coloring JSON with a \"signs\" array");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (!replay.empty()) {
      const auto doc = discoreset::read_json_file(replay);
      if (!doc.contains("config")) throw discoreset::ValidationError(replay + ": no embedded config");
      c = discoreset::cli::config_from_json(doc.at("config"));
    } else {
      c.command = app.get_subcommands().front()->get_name();
    }

    discoreset::json out;
    if (c.command == "build") {
      auto r = discoreset::cli::run_build(c);
      if (r.coloring) discoreset::write_json(c.emit_coloring, *r.coloring);
      out = std::move(r.payload);
    } else if (c.command == "eval") {
      out = discoreset::cli::run_eval(c);
    } else if (c.command == "bench") {
      out = discoreset::cli::run_bench(c);
    } else {
      out = discoreset::cli::run_verify(c);
    }

    if (c.output.empty()) {
      std::cout << out.dump(2) << "\n";
    } else {
      discoreset::write_json(c.output, out);
    }
    if (c.command == "verify" && !out.at("pass").get<bool>()) return kExitVerifyFailed;
    return kExitOk;
  } catch (const discoreset::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const discoreset::ColoringFailure& e) {
    std::cerr << "coloring failure: " << e.what() << "\n";
    return kExitColoring;
  } catch (const discoreset::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
