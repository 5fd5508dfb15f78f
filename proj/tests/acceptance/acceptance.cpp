#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sneakbp/sneakbp.hpp"

namespace {

using namespace sneakbp;
using harness::ResultRow;
using harness::SimulationConfig;

struct Verdict {
  bool pass = true;
  std::string summary;
};

void note(const char* fmt, auto... args) {
  std::printf("  ");
  std::printf(fmt, args...);
  std::printf("\n");
  std::fflush(stdout);
}

double pooled_se(const ResultRow& a, const ResultRow& b) {
  return std::hypot(a.ber_std_error(), b.ber_std_error());
}

/// a <= b up to two pooled standard errors.
bool le_within(double a, double b, double se) { return a <= b + 2.0 * se; }

const ResultRow& find_row(const std::vector<ResultRow>& rows, double sigma, const std::string& detector) {
  for (const auto& r : rows)
    if (r.sigma == sigma && r.detector == detector) return r;
  throw std::logic_error("missing row " + detector);
}

Verdict criterion1() {
  ChannelParams p;
  p.sigma = 70.0;
  p.p_sf = 0.0;
  const long arrays = 39063;  // 16 x 16 cells each, just over 1e7 cells
  Rng rng = make_stream(1, {1001});
  const DataArray zeros(p.rows, p.cols);
  const SelectorFailureMap healthy(p.rows, p.cols);
  long cells = 0;
  long errors = 0;
  for (long a = 0; a < arrays; ++a) {
    const ReadbackMatrix y = read_array(zeros, healthy, p, rng);
    const BitGrid x = threshold_detector(y.signal(), p);
    for (auto v : x.values()) errors += v;
    cells += static_cast<long>(x.size());
  }
  const double q = 0.5 * std::erfc(450.0 / 70.0 / std::sqrt(2.0));
  note("Q(450/70) = %.6g, reference 6.4404e-11", q);
  note("high cells %ld, threshold errors %ld, expected %.3g", cells, errors, q * static_cast<double>(cells));
  const bool analytic = std::abs(q / 6.4404e-11 - 1.0) < 1e-4;
  return {analytic && errors == 0 && cells >= 10000000,
          "zero misdetections over " + std::to_string(cells) + " uninterfered high cells"};
}

Verdict criterion2() {
  ChannelParams p;
  p.rows = 8;
  p.cols = 8;
  p.q = 0.5;
  p.p_sf = 0.01;
  const double theory = theoretical_sneak_rate(p);
  const long arrays = 100000;
  long zeros = 0;
  long sneaks = 0;
  double sum_z2 = 0, sum_e2 = 0, sum_ze = 0;
  long origin_zero = 0;
  long origin_sneak = 0;
  for (long a = 0; a < arrays; ++a) {
    Rng rng = make_stream(2, {1002, static_cast<std::uint64_t>(a)});
    const DataArray x = sample_data(p, rng);
    const SelectorFailureMap s = sample_selector_failures(p, rng);
    const SneakEventMap e = compute_sneak_events(x, s);
    long z = 0, k = 0;
    for (std::size_t t = 0; t < x.size(); ++t)
      if (!x.at_flat(t)) {
        ++z;
        k += e.at_flat(t);
      }
    zeros += z;
    sneaks += k;
    sum_z2 += static_cast<double>(z * z);
    sum_e2 += static_cast<double>(k * k);
    sum_ze += static_cast<double>(z * k);
    if (!x(0, 0)) {
      ++origin_zero;
      origin_sneak += e(0, 0);
    }
  }
  const double n = static_cast<double>(arrays);
  const double rate = static_cast<double>(sneaks) / static_cast<double>(zeros);
  const double binom_se = std::sqrt(theory * (1 - theory) / static_cast<double>(zeros));
  // Ratio estimator with each array as one cluster.
  const double zbar = static_cast<double>(zeros) / n;
  const double var_ratio = (sum_e2 - 2 * rate * sum_ze + rate * rate * sum_z2) / (n - 1) / (zbar * zbar) / n;
  const double array_se = std::sqrt(std::max(var_ratio, 0.0));
  const double n0 = static_cast<double>(origin_zero);
  const double origin_rate = static_cast<double>(origin_sneak) / n0;
  const double origin_se = std::sqrt(theory * (1 - theory) / n0);
  note("theory %.6f", theory);
  note("all cells: MC %.6f, |diff| = %.2f binomial SE, %.2f array-clustered SE", rate,
       std::abs(rate - theory) / binom_se, std::abs(rate - theory) / array_se);
  note("cell (0,0): MC %.6f over %ld arrays, |diff| = %.2f binomial SE", origin_rate, origin_zero,
       std::abs(origin_rate - theory) / origin_se);
  const bool ok = std::abs(origin_rate - theory) <= 3 * origin_se && std::abs(rate - theory) <= 3 * array_se;
  return {ok, "sneak-rate formula within 3 standard errors of Monte Carlo at 8x8, q=0.5, p_sf=0.01"};
}

bool check_ordering(const std::vector<ResultRow>& rows, double sigma) {
  static const std::vector<std::string> order{"genie", "bp-improved", "bp", "ese", "threshold"};
  bool ok = true;
  std::string line;
  for (const auto& d : order) {
    const auto& r = find_row(rows, sigma, d);
    char buf[96];
    std::snprintf(buf, sizeof buf, " %s=%.4g", d.c_str(), r.ber);
    line += buf;
  }
  note("sigma=%g trials=%ld:%s", sigma, find_row(rows, sigma, "genie").trials, line.c_str());
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    const auto& a = find_row(rows, sigma, order[k]);
    const auto& b = find_row(rows, sigma, order[k + 1]);
    const bool pass = le_within(a.ber, b.ber, pooled_se(a, b));
    note("  %-11s <= %-11s %s (gap %.2f pooled SE)", order[k].c_str(), order[k + 1].c_str(), pass ? "ok" : "VIOLATED",
         (a.ber - b.ber) / pooled_se(a, b));
    ok = ok && pass;
  }
  const auto& g = find_row(rows, sigma, "genie");
  const auto& i = find_row(rows, sigma, "bp-improved");
  const bool near_genie = i.ber <= 2.0 * g.ber;
  note("  bp-improved <= 2 x genie %s (ratio %.3f)", near_genie ? "ok" : "VIOLATED", i.ber / g.ber);
  return ok && near_genie;
}

SimulationConfig ordering_config(std::vector<double> sigmas, long trials, NoiseModel noise, std::uint64_t seed) {
  SimulationConfig c;
  c.channel.p_sf = 0.001;
  c.channel.noise = noise;
  c.sigmas = std::move(sigmas);
  c.detectors = {DetectorVariant::genie, DetectorVariant::improved, DetectorVariant::basic, DetectorVariant::ese,
                 DetectorVariant::threshold};
  c.trials = trials;
  c.min_block_errors = 0;
  c.seed = seed;
  return c;
}

Verdict criterion3() {
  const auto c = ordering_config({40, 50, 60, 70}, 100000, NoiseModel::gaussian, 3);
  const auto rows = harness::run_raw_ber(c);
  bool ok = true;
  for (double s : c.sigmas) ok = check_ordering(rows, s) && ok;
  return {ok, "genie <= bp-improved <= bp <= ese <= threshold and bp-improved <= 2 x genie, 16x16, Gaussian"};
}

Verdict criterion4() {
  const std::vector<double> sigmas{30, 40, 50, 60, 70};
  auto sfdr_rows = [&](int size, long trials) {
    SimulationConfig c;
    c.channel.rows = size;
    c.channel.cols = size;
    c.channel.p_sf = 0.001;
    c.sigmas = sigmas;
    c.detectors = {DetectorVariant::basic, DetectorVariant::improved};
    c.trials = trials;
    c.min_block_errors = 0;
    c.seed = 4;
    return harness::run_sfdr(c);
  };
  const auto small = sfdr_rows(8, 200000);
  const auto large = sfdr_rows(16, 30000);
  bool ok = true;
  for (double s : sigmas) {
    const auto& b16 = find_row(large, s, "bp");
    const auto& i16 = find_row(large, s, "bp-improved");
    const auto& b8 = find_row(small, s, "bp");
    const auto& i8 = find_row(small, s, "bp-improved");
    const bool improved_ok = le_within(*b16.sfdr_mean, *i16.sfdr_mean, std::hypot(b16.sfdr_std_error, i16.sfdr_std_error)) &&
                             le_within(*b8.sfdr_mean, *i8.sfdr_mean, std::hypot(b8.sfdr_std_error, i8.sfdr_std_error));
    const bool size_ok = le_within(*b8.sfdr_mean, *b16.sfdr_mean, std::hypot(b8.sfdr_std_error, b16.sfdr_std_error)) &&
                         le_within(*i8.sfdr_mean, *i16.sfdr_mean, std::hypot(i8.sfdr_std_error, i16.sfdr_std_error));
    note("sigma=%g  8x8: bp %.4f bp-improved %.4f (n=%ld)  16x16: bp %.4f bp-improved %.4f (n=%ld)  %s %s", s,
         *b8.sfdr_mean, *i8.sfdr_mean, b8.sfdr_n, *b16.sfdr_mean, *i16.sfdr_mean, b16.sfdr_n,
         improved_ok ? "improved>=basic ok" : "improved>=basic VIOLATED", size_ok ? "16>=8 ok" : "16>=8 VIOLATED");
    ok = ok && improved_ok && size_ok;
  }
  return {ok, "SFDR improved >= basic and 16x16 >= 8x8 at every sigma, p_sf=0.001"};
}

/// Row i of the Kronecker power F^{(x)n} with F = [1 0; 1 1]: entry (i, j) is 1 iff j's bits are a subset of i's.
std::vector<std::vector<std::uint8_t>> kronecker_generator(int n_c) {
  std::vector<std::vector<std::uint8_t>> g{{1}};
  for (int size = 1; size < n_c; size *= 2) {
    std::vector<std::vector<std::uint8_t>> next(2 * size, std::vector<std::uint8_t>(2 * size, 0));
    for (int r = 0; r < size; ++r)
      for (int c = 0; c < size; ++c) {
        next[r][c] = g[r][c];
        next[r + size][c] = g[r][c];
        next[r + size][c + size] = g[r][c];
      }
    g = std::move(next);
  }
  return g;
}

polar::Bits multiply(const polar::Bits& u, const std::vector<std::vector<std::uint8_t>>& g) {
  polar::Bits x(u.size(), 0);
  for (std::size_t r = 0; r < u.size(); ++r)
    if (u[r])
      for (std::size_t c = 0; c < u.size(); ++c) x[c] ^= g[r][c];
  return x;
}

Verdict criterion5() {
  const auto g8 = kronecker_generator(8);
  const polar::PolarCodeSpec full8(8, {0, 1, 2, 3, 4, 5, 6, 7});
  int mismatches8 = 0;
  for (int w = 0; w < 256; ++w) {
    polar::Bits u(8);
    for (int b = 0; b < 8; ++b) u[b] = (w >> b) & 1;
    mismatches8 += polar::encode(u, full8) != multiply(u, g8);
  }
  const auto g256 = kronecker_generator(256);
  const auto spec = polar::pw_construct(256, 204);
  Rng rng = make_stream(5, {1005});
  std::bernoulli_distribution bit(0.5);
  int mismatches256 = 0;
  for (int t = 0; t < 1000; ++t) {
    polar::Bits info(204);
    for (auto& b : info) b = bit(rng);
    polar::Bits u(256, 0);
    for (int k = 0; k < 204; ++k) u[spec.info_set()[k]] = info[k];
    mismatches256 += polar::encode(info, spec) != multiply(u, g256);
  }
  note("N=8: %d of 256 inputs differ; N=256: %d of 1000 random frames differ", mismatches8, mismatches256);
  return {mismatches8 == 0 && mismatches256 == 0, "encoder equals the Kronecker-power generator matrix"};
}

Verdict criterion6() {
  const auto spec = polar::pw_construct(256, 204);
  Rng rng = make_stream(6, {1006});
  std::bernoulli_distribution bit(0.5);
  int frame_errors = 0;
  for (int t = 0; t < 1000; ++t) {
    polar::Bits info(204);
    for (auto& b : info) b = bit(rng);
    const polar::Bits x = polar::encode(info, spec);
    std::vector<double> llr(256);
    for (int j = 0; j < 256; ++j) llr[j] = x[j] ? -polar::kLlrClamp : polar::kLlrClamp;
    polar::PolarBpDecoder dec(spec);
    dec.set_channel_llrs(llr);
    dec.iterate(5);
    frame_errors += dec.info_decisions() != info;
  }
  note("frame errors %d of 1000", frame_errors);
  return {frame_errors == 0, "noiseless BP decoding, N=256, K=204, FER 0"};
}

Verdict criterion7() {
  SimulationConfig c;
  c.method = "gena";
  c.construction.sigma_design = 40.0;
  c.gena.frames_per_eval = 500;
  c.seed = 7;
  const auto out = harness::construct_code(c);
  const auto& res = *out.gena;
  const auto& a = out.spec.info_set();
  const bool size_ok = out.spec.dimension() == 204;
  bool reliable_ok = true;
  for (int i : out.sets.reliable) reliable_ok = reliable_ok && std::binary_search(a.begin(), a.end(), i);
  bool frozen_ok = true;
  for (int i : out.sets.unreliable) frozen_ok = frozen_ok && !std::binary_search(a.begin(), a.end(), i);
  bool monotone = true;
  for (std::size_t g = 1; g < res.best_history.size(); ++g)
    monotone = monotone && res.best_history[g] <= res.best_history[g - 1];
  const bool beats_pw = res.best.bler() <= res.best_pw_seeded_initial.bler();
  note("|A_pre|=%zu |F_pre|=%zu |Q|=%zu", out.sets.reliable.size(), out.sets.unreliable.size(),
       out.sets.searchable.size());
  note("|A|=%d %s; A_pre in A %s; F_pre disjoint %s", out.spec.dimension(), size_ok ? "ok" : "WRONG",
       reliable_ok ? "ok" : "VIOLATED", frozen_ok ? "ok" : "VIOLATED");
  note("best BLER: initial %.4f, final %.4f over %zu generations; history nonincreasing %s",
       res.best_history.front(), res.best_history.back(), res.best_history.size() - 1, monotone ? "ok" : "VIOLATED");
  note("best PW-seeded initial BLER %.4f (%ld/%ld), final %.4f (%ld/%ld)", res.best_pw_seeded_initial.bler(),
       res.best_pw_seeded_initial.block_errors, res.best_pw_seeded_initial.frames, res.best.bler(),
       res.best.block_errors, res.best.frames);
  return {size_ok && reliable_ok && frozen_ok && monotone && beats_pw,
          "GenA contract, nonincreasing best BLER and final <= best PW-seeded initial at sigma_design=40"};
}

Verdict criterion8() {
  SimulationConfig c;
  c.channel.p_sf = 0.001;
  c.sigmas = {50.0};
  c.trials = 10000;
  c.min_block_errors = 0;
  c.seed = 8;
  c.schemes = {CodedScheme::joint, CodedScheme::ese_iteration};
  const auto spec = polar::pw_construct(256, 204);
  c.joint.outer_iterations = 10;
  const auto ten = harness::run_coded(c, spec);
  c.schemes = {CodedScheme::joint};
  c.joint.outer_iterations = 1;
  const auto one = harness::run_coded(c, spec);
  const auto& j10 = find_row(ten, 50.0, "joint");
  const auto& ese = find_row(ten, 50.0, "ese-iter");
  const auto& j1 = find_row(one, 50.0, "joint");
  const double se_a = std::hypot(j10.bler_std_error(), j1.bler_std_error());
  const double se_b = std::hypot(j10.bler_std_error(), ese.bler_std_error());
  const bool a_ok = le_within(j10.bler, j1.bler, se_a);
  const bool b_ok = le_within(j10.bler, ese.bler, se_b);
  note("BLER joint(10 outer) %.5f (%ld/%ld)", j10.bler, j10.block_errors, j10.trials);
  note("BLER joint(1 outer)  %.5f (%ld/%ld) %s", j1.bler, j1.block_errors, j1.trials, a_ok ? "ok" : "VIOLATED");
  note("BLER ese-iter        %.5f (%ld/%ld) %s", ese.bler, ese.block_errors, ese.trials, b_ok ? "ok" : "VIOLATED");
  return {a_ok && b_ok, "joint(10) <= joint(1) and joint <= ese-iter, 16x16, K=204, sigma=50"};
}

Verdict criterion9() {
  bool moments_ok = true;
  ChannelParams base;
  base.noise = NoiseModel::lognormal;
  Rng rng = make_stream(9, {1009});
  std::normal_distribution<double> z(0.0, 1.0);
  for (double sigma : {10.0, 40.0, 100.0})
    for (Level l : {Level::high, Level::sneak, Level::low}) {
      const double r = base.level(l);
      const auto lp = lognormal_params(r, sigma);
      double sum = 0, sum_sq = 0;
      const int n = 1000000;
      for (int k = 0; k < n; ++k) {
        const double v = std::exp(lp.mu + std::sqrt(lp.s_squared) * z(rng));
        sum += v;
        sum_sq += v * v;
      }
      const double mean = sum / n;
      const double var = (sum_sq - n * mean * mean) / (n - 1);
      const bool ok = std::abs(mean / r - 1) < 0.01 && std::abs(var / (sigma * sigma) - 1) < 0.05;
      note("R=%.3f sigma=%g: mean error %.3f%%, variance error %.3f%% %s", r, sigma, 100 * (mean / r - 1),
           100 * (var / (sigma * sigma) - 1), ok ? "ok" : "VIOLATED");
      moments_ok = moments_ok && ok;
    }
  const auto c = ordering_config({40, 60}, 100000, NoiseModel::lognormal, 9);
  const auto rows = harness::run_raw_ber(c);
  bool order_ok = true;
  for (double s : c.sigmas) order_ok = check_ordering(rows, s) && order_ok;
  return {moments_ok && order_ok, "lognormal moments and detector ordering at sigma 40, 60"};
}

Verdict criterion10() {
  SimulationConfig d = ordering_config({40, 70}, 700, NoiseModel::gaussian, 10);
  SimulationConfig coded;
  coded.sigmas = {45, 60};
  coded.trials = 600;
  coded.min_block_errors = 50;
  coded.seed = 10;
  coded.schemes = {CodedScheme::joint, CodedScheme::ese_iteration, CodedScheme::pipeline};
  const auto spec = polar::pw_construct(256, 204);
  SimulationConfig con;
  con.channel.rows = 8;
  con.channel.cols = 8;
  con.block_length = 64;
  con.dimension = 51;
  con.gena.population_size = 6;
  con.gena.max_generations = 8;
  con.gena.frames_per_eval = 100;
  con.seed = 10;
  bool ok = true;
  std::string ref_raw, ref_sfdr, ref_coded, ref_code;
  for (int threads : {1, 2, 4}) {
    d.threads = coded.threads = con.threads = threads;
    const std::string raw = harness::format_csv(harness::run_raw_ber(d));
    SimulationConfig s = d;
    s.detectors = {DetectorVariant::basic, DetectorVariant::improved};
    const std::string sf = harness::format_csv(harness::run_sfdr(s));
    const std::string cb = harness::format_csv(harness::run_coded(coded, spec));
    const std::string code = polar::format_code(harness::construct_code(con).spec);
    if (threads == 1) {
      ref_raw = raw;
      ref_sfdr = sf;
      ref_coded = cb;
      ref_code = code;
      continue;
    }
    const bool same = raw == ref_raw && sf == ref_sfdr && cb == ref_coded && code == ref_code;
    note("%d workers vs 1: detect-ber %s, sfdr %s, coded-ber %s, construct %s", threads,
         raw == ref_raw ? "identical" : "DIFFERENT", sf == ref_sfdr ? "identical" : "DIFFERENT",
         cb == ref_coded ? "identical" : "DIFFERENT", code == ref_code ? "identical" : "DIFFERENT");
    ok = ok && same;
  }
  return {ok, "byte-identical output across 1, 2 and 4 workers"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks for the sneak-path simulator"};
  int only = 0;
  app.add_option("--criterion", only, "Run a single criterion (1-10); all when omitted")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::function<Verdict()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                       criterion6, criterion7, criterion8, criterion9, criterion10};
  bool all = true;
  for (int k = 1; k <= 10; ++k) {
    if (only != 0 && k != only) continue;
    std::printf("criterion %d\n", k);
    std::fflush(stdout);
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[static_cast<std::size_t>(k - 1)]();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %d: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", k, v.summary.c_str(), secs);
    std::fflush(stdout);
    all = all && v.pass;
  }
  return all ? 0 : 1;
}
