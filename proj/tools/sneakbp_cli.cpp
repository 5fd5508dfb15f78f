#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sneakbp/sneakbp.hpp"

namespace {

using namespace sneakbp;

void emit(const std::vector<harness::ResultRow>& rows, const std::string& out) {
  if (out.empty() || out == "-")
    std::cout << harness::format_csv(rows);
  else
    harness::write_csv(rows, out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ReRAM sneak-path channel simulator: detection, polar coding and code construction"};
  app.set_config("--config", "", "flat key=value file; command-line flags override it");
  app.require_subcommand(1);
  app.fallthrough();

  harness::SimulationConfig cfg;
  std::string noise = "gaussian";
  std::vector<std::string> detectors;
  std::vector<std::string> schemes;
  std::string out;
  std::string code_path;
  std::string refine = "fixed-point";

  app.add_option("--rows", cfg.channel.rows, "array rows M")->capture_default_str();
  app.add_option("--cols", cfg.channel.cols, "array columns N")->capture_default_str();
  app.add_option("--r0", cfg.channel.r_high, "high resistance R0 in ohms")->capture_default_str();
  app.add_option("--r1", cfg.channel.r_low, "low resistance R1 in ohms")->capture_default_str();
  app.add_option("--psf", cfg.channel.p_sf, "selector failure probability")->capture_default_str();
  app.add_option("--q", cfg.channel.q, "probability of a stored 1")->capture_default_str();
  app.add_option("--sigma", cfg.sigmas, "noise standard deviations in ohms")->capture_default_str();
  app.add_option("--noise", noise, "noise model")->check(CLI::IsMember({"gaussian", "lognormal"}))->capture_default_str();
  app.add_option("--trials", cfg.trials, "arrays or frames per sigma")->capture_default_str();
  app.add_option("--min-block-errors", cfg.min_block_errors,
                 "stop a sigma point once every column has this many block errors (0 disables)")
      ->capture_default_str();
  app.add_option("--seed", cfg.seed, "master seed")->capture_default_str();
  app.add_option("--threads", cfg.threads, "worker threads")->capture_default_str();
  app.add_option("--out", out, "CSV output path (stdout when omitted)");

  app.add_option("--detector", detectors, "bp | bp-improved | ese | threshold | genie (repeatable)");
  app.add_option("--det-iters", cfg.detector.max_iterations, "detector iterations")->capture_default_str();
  app.add_option("--sf-threshold", cfg.detector.sf_decision_threshold, "selector-failure decision threshold")
      ->capture_default_str();
  app.add_option("--refine", refine, "definite-low refinement")
      ->check(CLI::IsMember({"fixed-point", "single-pass"}))
      ->capture_default_str();

  app.add_option("--code", code_path, "code-construction file");
  app.add_option("--outer-iters", cfg.joint.outer_iterations, "outer detector/decoder iterations")->capture_default_str();
  app.add_option("--det-iters-per-outer", cfg.joint.detector_iterations_per_outer)->capture_default_str();
  app.add_option("--dec-iters-per-outer", cfg.joint.decoder_iterations_per_outer)->capture_default_str();
  app.add_flag("--strict", cfg.joint.strict, "restart the detector on every outer pass");
  app.add_option("--scheme", schemes, "joint | ese-iter | pipeline (repeatable)");

  app.add_option("--N", cfg.block_length, "code length")->capture_default_str();
  app.add_option("--K", cfg.dimension, "code dimension")->capture_default_str();
  app.add_option("--method", cfg.method, "construction method")->check(CLI::IsMember({"gena", "pw"}))->capture_default_str();
  app.add_option("--pop", cfg.gena.population_size, "GenA population size")->capture_default_str();
  app.add_option("--delta", cfg.gena.delta, "GenA selection sharpness")->capture_default_str();
  app.add_option("--mutations", cfg.gena.mutation_count, "swaps per mutation")->capture_default_str();
  app.add_option("--generations", cfg.gena.max_generations, "GenA generations")->capture_default_str();
  app.add_option("--frames-per-eval", cfg.gena.frames_per_eval, "frames per BLER evaluation")->capture_default_str();
  app.add_option("--error-target", cfg.gena.error_target, "block errors ending an evaluation early (0 disables)")
      ->capture_default_str();
  app.add_option("--beta1", cfg.construction.beta1)->capture_default_str();
  app.add_option("--beta2", cfg.construction.beta2)->capture_default_str();
  app.add_option("--sigma-design", cfg.construction.sigma_design, "design noise std in ohms")->capture_default_str();

  auto* detect_cmd = app.add_subcommand("detect-ber", "uncoded BER of the detectors");
  auto* sfdr_cmd = app.add_subcommand("sfdr", "selector failure detection rate");
  auto* coded_cmd = app.add_subcommand("coded-ber", "info-bit BER/BLER with a polar code");
  auto* construct_cmd = app.add_subcommand("construct", "build a polar code (GenA or PW)");

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.channel.noise = parse_noise_model(noise);
    cfg.detector.refine = refine == "single-pass" ? RefineMode::single_pass : RefineMode::fixed_point;
    if (!detectors.empty()) {
      cfg.detectors.clear();
      for (const auto& d : detectors) cfg.detectors.push_back(parse_detector(d));
    }
    if (!schemes.empty()) {
      cfg.schemes.clear();
      for (const auto& s : schemes) cfg.schemes.push_back(parse_scheme(s));
    }

    if (detect_cmd->parsed()) {
      if (detectors.empty())
        cfg.detectors = {DetectorVariant::genie, DetectorVariant::improved, DetectorVariant::basic, DetectorVariant::ese,
                         DetectorVariant::threshold};
      emit(harness::run_raw_ber(cfg), out);
    } else if (sfdr_cmd->parsed()) {
      if (detectors.empty()) cfg.detectors = {DetectorVariant::basic, DetectorVariant::improved};
      emit(harness::run_sfdr(cfg), out);
    } else if (coded_cmd->parsed()) {
      if (code_path.empty()) throw std::invalid_argument("coded-ber needs --code");
      emit(harness::run_coded(cfg, polar::read_code_file(code_path)), out);
    } else if (construct_cmd->parsed()) {
      if (code_path.empty()) throw std::invalid_argument("construct needs --code for the output file");
      const auto result = harness::construct_code(cfg);
      polar::write_code_file(result.spec, code_path);
      std::fprintf(stderr, "A_pre=%zu F_pre=%zu Q=%zu", result.sets.reliable.size(), result.sets.unreliable.size(),
                   result.sets.searchable.size());
      if (result.gena)
        std::fprintf(stderr, " best BLER %.6g (%ld/%ld), best PW-seeded initial %.6g", result.gena->best.bler(),
                     result.gena->best.block_errors, result.gena->best.frames,
                     result.gena->best_pw_seeded_initial.bler());
      std::fprintf(stderr, "\n");
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
