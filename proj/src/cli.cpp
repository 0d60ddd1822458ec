#include "aisets/cli.hpp"

#include <CLI11.hpp>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "aisets/aligned_sets.hpp"
#include "aisets/entropy.hpp"
#include "aisets/error.hpp"
#include "aisets/io.hpp"
#include "aisets/numeric.hpp"
#include "aisets/parallel.hpp"
#include "aisets/schemes.hpp"

namespace aisets::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Artifact {
  std::string name;
  std::string contents;
};

struct Outcome {
  std::vector<Artifact> artifacts;
  std::vector<std::string> reasons;  // invariant falsifications
  json instances = json::array();    // the falsifying instances
  std::string summary;               // printed to stdout
};

struct Context {
  json config;
  Stamp stamp;
  int threads = 1;
};

void require_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw UsageError(where + " must be a JSON object");
  const std::set<std::string> known(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) throw UsageError(where + ": unknown field '" + item.key() + "'");
  }
}

std::vector<double> powers_from_json(const json& j) {
  if (j.is_array()) return j.get<std::vector<double>>();
  require_keys(j, {"lo_decade", "hi_decade", "step"}, "powers");
  return power_grid(j.at("lo_decade").get<double>(), j.at("hi_decade").get<double>(),
                    j.value("step", 1.0));
}

// ---------------------------------------------------------------------------
// Codebook generation

struct CodebookSpec {
  std::size_t size = 12;
  std::string mapping = "random";  // random | zero | reverse | worst
  std::optional<Symbol> x2_max;
  std::size_t anneal_steps = 400;
};

CodebookSpec codebook_spec_from_json(const json& j) {
  require_keys(j, {"size", "mapping", "x2_max", "anneal_steps"}, "codebook");
  CodebookSpec spec;
  spec.size = j.value("size", spec.size);
  spec.mapping = j.value("mapping", spec.mapping);
  if (j.contains("x2_max")) spec.x2_max = j.at("x2_max").get<Symbol>();
  spec.anneal_steps = j.value("anneal_steps", spec.anneal_steps);
  static const std::set<std::string> mappings{"random", "zero", "reverse", "worst"};
  if (!mappings.count(spec.mapping)) throw UsageError("codebook.mapping: unknown kind " + spec.mapping);
  if (spec.size == 0) throw UsageError("codebook.size must be positive");
  return spec;
}

IntegerCodebook generate_codebook(const CodebookSpec& spec, double power, int length,
                                  const ChannelDensity& density, Rng& rng) {
  const Symbol q = ceil_sqrt(power);
  const Symbol x2_max = std::min(q, spec.x2_max.value_or(q));
  // Small (P, n) cells cannot hold the requested size; they get the whole
  // input space instead.
  const double space = std::pow(static_cast<double>(q + 1), length);
  const auto size = static_cast<std::size_t>(std::min(static_cast<double>(spec.size), space));
  std::set<Word> seen;
  std::vector<Word> x1;
  while (x1.size() < size) {
    Word row(length);
    for (auto& s : row) s = static_cast<Symbol>(rng() % static_cast<std::uint64_t>(q + 1));
    if (seen.insert(row).second) x1.push_back(row);
  }
  std::vector<Word> x2(x1.size(), Word(length, 0));
  if (spec.mapping == "random") {
    for (auto& row : x2) {
      for (auto& s : row) s = static_cast<Symbol>(rng() % static_cast<std::uint64_t>(x2_max + 1));
    }
  } else if (spec.mapping == "reverse") {
    for (std::size_t m = 0; m < x1.size(); ++m) {
      for (int t = 0; t < length; ++t) x2[m][t] = std::max<Symbol>(0, x2_max - x1[m][t]);
    }
  } else if (spec.mapping == "worst") {
    AnnealSchedule schedule;
    schedule.steps = spec.anneal_steps;
    schedule.initial_temperature = 0.5;
    schedule.final_temperature = 1e-3;
    x2 = worst_case_mapping(x1, power, density, x2_max, 20000, schedule, rng).mapping;
  }
  return IntegerCodebook::two_user(std::move(x1), std::move(x2), power);
}

// ---------------------------------------------------------------------------
// canonical-reduce

Outcome canonical_reduce(const Context& ctx) {
  require_keys(ctx.config, {"seed", "channel"}, "config");
  const json& cj = ctx.config.at("channel");
  require_keys(cj, {"M", "power", "coefficients", "length"}, "channel");
  GeneralChannel2x2 channel;
  channel.bound = cj.value("M", channel.bound);
  channel.power = cj.value("power", channel.power);
  if (cj.contains("coefficients")) {
    for (const json& m : cj.at("coefficients")) {
      const auto rows = m.get<std::vector<std::vector<double>>>();
      if (rows.size() != 2 || rows[0].size() != 2 || rows[1].size() != 2) {
        throw UsageError("channel.coefficients entries must be 2x2 matrices");
      }
      Eigen::Matrix2d g;
      g << rows[0][0], rows[0][1], rows[1][0], rows[1][1];
      channel.coefficients.push_back(g);
    }
  } else {
    const int length = cj.at("length").get<int>();
    if (length < 1) throw UsageError("channel.length must be positive");
    Rng rng = make_stream(ctx.stamp.seed, 0);
    const double lo = 1.0 / channel.bound;
    while (static_cast<int>(channel.coefficients.size()) < length) {
      Eigen::Matrix2d g;
      for (int i = 0; i < 4; ++i) g(i / 2, i % 2) = lo + (channel.bound - lo) * uniform01(rng);
      const double det = std::abs(g.determinant());
      if (det >= lo && det <= channel.bound) channel.coefficients.push_back(g);
    }
  }
  if (channel.coefficients.empty()) throw UsageError("channel has no coefficients");
  const CanonicalReduction reduction = reduce_to_canonical(channel);

  Outcome outcome;
  CsvTable table({"t", "G11", "G12", "G21", "G22", "det", "G_canonical", "factorization_residual",
                  "forward_frobenius_sq"});
  const double factor = canonical_power_factor(channel.bound);
  for (std::size_t t = 0; t < channel.coefficients.size(); ++t) {
    const Eigen::Matrix2d& g = channel.coefficients[t];
    Eigen::Matrix2d lower;
    lower << 1.0, 0.0, reduction.channel.coefficient(1, 0, static_cast<int>(t)), 1.0;
    const Eigen::Matrix2d& forward = reduction.transform.forward[t];
    const double residual = (g - lower * forward).norm() / g.norm();
    const double energy = forward.squaredNorm();
    const double identity_error =
        (reduction.transform.inverse[t] * forward - Eigen::Matrix2d::Identity()).norm();
    table.row()
        .cell(static_cast<std::int64_t>(t))
        .cell(g(0, 0)).cell(g(0, 1)).cell(g(1, 0)).cell(g(1, 1))
        .cell(g.determinant())
        .cell(reduction.channel.coefficient(1, 0, static_cast<int>(t)))
        .cell(residual)
        .cell(energy);
    if (residual > 1e-12 || identity_error > 1e-12 || energy > factor * (1.0 + 1e-12)) {
      outcome.reasons.push_back("canonical factorization fails at t=" + std::to_string(t));
      outcome.instances.push_back({{"t", t}, {"G", {{g(0, 0), g(0, 1)}, {g(1, 0), g(1, 1)}}}});
    }
  }
  json doc = to_json(reduction);
  doc["M"] = channel.bound;
  doc["power"] = channel.power;
  outcome.artifacts.push_back({"canonical.csv", table.render(ctx.stamp)});
  outcome.artifacts.push_back({"canonical.json", render_json(doc, ctx.stamp)});
  outcome.summary = "canonical bound " + format_number(reduction.channel.bound()) + ", power " +
                    format_number(reduction.channel.power()) + ", " +
                    std::to_string(channel.coefficients.size()) + " channel uses\n";
  return outcome;
}

// ---------------------------------------------------------------------------
// enumerate-sets

Outcome enumerate_sets(const Context& ctx) {
  require_keys(ctx.config, {"seed", "codebook", "realization", "density", "M"}, "config");
  const IntegerCodebook codebook = codebook_from_json(ctx.config.at("codebook"));
  if (codebook.users != 2) throw UsageError("enumerate-sets handles two-user codebooks");
  std::vector<double> realization;
  if (ctx.config.contains("realization")) {
    realization = ctx.config.at("realization").get<std::vector<double>>();
  } else {
    const ChannelDensity density =
        make_density(density_spec_from_json(ctx.config.at("density")), codebook.power);
    Rng rng = make_stream(ctx.stamp.seed, 0);
    for (int t = 0; t < codebook.length; ++t) realization.push_back(density.sample(rng));
  }
  if (static_cast<int>(realization.size()) != codebook.length) {
    throw UsageError("realization length differs from the codebook n");
  }
  const double bound = ctx.config.value("M", 4.0);
  const CanonicalChannel channel = CanonicalChannel::two_user(realization, bound, codebook.power);
  channel.validate();

  Outcome outcome;
  CsvTable outputs({"msg", "t", "k", "value"});
  for (std::size_t m = 0; m < codebook.size(); ++m) {
    const DeterministicOutput y = deterministic_output(codebook, m, channel);
    for (int t = 0; t < codebook.length; ++t) {
      for (int k = 0; k < codebook.users; ++k) {
        outputs.row()
            .cell(static_cast<std::int64_t>(m))
            .cell(t)
            .cell(k + 1)
            .cell(static_cast<std::int64_t>(y.outputs[k][t]));
      }
    }
  }
  const auto sets = partition_into_aligned_sets(codebook, channel);
  json jsets = json::array();
  std::vector<int> covered(codebook.size(), 0);
  for (const AlignedImageSet& set : sets) {
    jsets.push_back({{"representative", set.representative},
                     {"members", set.members},
                     {"image", set.image}});
    for (std::size_t m : set.members) {
      ++covered[m];
      if (user_image(codebook, m, channel, 1) != set.image) {
        outcome.reasons.push_back("member " + std::to_string(m) + " does not cast the set image");
      }
    }
  }
  if (std::any_of(covered.begin(), covered.end(), [](int c) { return c != 1; })) {
    outcome.reasons.push_back("aligned sets do not partition the codebook");
  }
  if (!outcome.reasons.empty()) {
    outcome.instances.push_back({{"codebook", codebook_to_json(codebook)}, {"realization", realization}});
  }
  outcome.artifacts.push_back({"outputs.csv", outputs.render(ctx.stamp)});
  outcome.artifacts.push_back(
      {"sets.json",
       render_json({{"realization", realization}, {"codebook", codebook_to_json(codebook)}, {"sets", jsets}},
                   ctx.stamp)});
  std::string sizes;
  for (const AlignedImageSet& set : sets) {
    sizes += (sizes.empty() ? "" : ",") + std::to_string(set.members.size());
  }
  outcome.summary = std::to_string(sets.size()) + " aligned image sets, sizes {" + sizes + "}\n";
  return outcome;
}

// ---------------------------------------------------------------------------
// bound-check

Outcome bound_check(const Context& ctx) {
  const json& c = ctx.config;
  require_keys(c, {"seed", "powers", "lengths", "densities", "codebook", "samples", "budget", "rho"},
               "config");
  const std::vector<double> powers = c.contains("powers") ? powers_from_json(c.at("powers"))
                                                          : std::vector<double>{1e2, 1e3, 1e4};
  const auto lengths = c.value("lengths", std::vector<int>{1, 2, 3});
  std::vector<DensitySpec> densities;
  if (c.contains("densities")) {
    for (const json& d : c.at("densities")) densities.push_back(density_spec_from_json(d));
  } else {
    DensitySpec uniform;
    DensitySpec gaussian;
    gaussian.family = "truncated-gaussian";
    DensitySpec posterior;
    posterior.family = "quantized-posterior";
    posterior.alpha = 0.5;
    densities = {uniform, gaussian, posterior};
  }
  const CodebookSpec book = codebook_spec_from_json(c.value("codebook", json::object()));
  SetSizeOptions options;
  options.samples = c.value("samples", options.samples);
  options.budget = c.value("budget", options.budget);
  options.rho = c.value("rho", options.rho);
  for (int n : lengths) {
    if (n < 1) throw UsageError("lengths must be positive");
  }

  struct Cell {
    double power;
    int length;
    std::size_t density;
  };
  std::vector<Cell> cells;
  for (double p : powers) {
    for (int n : lengths) {
      for (std::size_t d = 0; d < densities.size(); ++d) cells.push_back({p, n, d});
    }
  }
  // Instantiate every density up front so bad specs fail before any work.
  std::vector<ChannelDensity> instantiated;
  for (const Cell& cell : cells) instantiated.push_back(make_density(densities[cell.density], cell.power));

  struct Result {
    IntegerCodebook codebook;
    AlignmentBoundReport report;
  };
  const auto results = parallel_map(cells.size(), ctx.threads, [&](std::size_t i) {
    Rng rng = make_stream(ctx.stamp.seed, i);
    const ChannelDensity& density = instantiated[i];
    Result r;
    r.codebook = generate_codebook(book, cells[i].power, cells[i].length, density, rng);
    r.report = expected_set_size(r.codebook, density, options, rng);
    return r;
  });

  Outcome outcome;
  CsvTable grid({"P", "n", "alpha", "density", "codebook_size", "empirical_E_S", "empirical_stderr",
                 "exact_E_S", "exact_max_E_S", "analytic_bound", "violated"});
  json reports = json::array();
  std::size_t violations = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const AlignmentBoundReport& report = results[i].report;
    grid.row()
        .cell(cells[i].power)
        .cell(cells[i].length)
        .cell(report.alpha)
        .cell(densities[cells[i].density].family)
        .cell(report.codebook_size)
        .cell(report.empirical_expected_size)
        .cell(report.empirical_stderr)
        .cell(report.exact_expected_size)
        .cell(report.exact_max_expected_size)
        .cell(report.analytic_bound)
        .cell(std::string(report.falsified() ? "1" : "0"));
    json entry = to_json(report);
    entry["density"] = density_to_json(instantiated[i]);
    reports.push_back(entry);
    if (report.falsified()) {
      ++violations;
      outcome.reasons.push_back("bound violated at P=" + format_number(cells[i].power) +
                                " n=" + std::to_string(cells[i].length));
      outcome.instances.push_back({{"codebook", codebook_to_json(results[i].codebook)},
                                   {"density", density_to_json(instantiated[i])},
                                   {"report", entry}});
    }
  }
  outcome.artifacts.push_back({"bound_grid.csv", grid.render(ctx.stamp)});
  outcome.artifacts.push_back({"bound_report.json", render_json({{"cells", reports}}, ctx.stamp)});
  outcome.summary = std::to_string(cells.size()) + " grid cells, " + std::to_string(violations) +
                    " violations\n";
  return outcome;
}

// ---------------------------------------------------------------------------
// entropy-grid

Outcome entropy_grid(const Context& ctx) {
  const json& c = ctx.config;
  require_keys(c, {"seed", "powers", "lengths", "density", "alphas", "codebook", "budget",
                   "fallback_samples", "tolerance"},
               "config");
  const std::vector<double> powers = c.contains("powers") ? powers_from_json(c.at("powers"))
                                                          : std::vector<double>{1e2, 1e3, 1e4};
  const auto lengths = c.value("lengths", std::vector<int>{1, 2});
  const DensitySpec spec = density_spec_from_json(c.value("density", json::object()));
  const auto alphas = c.value("alphas", std::vector<double>{spec.alpha.value_or(0.0)});
  const CodebookSpec book = codebook_spec_from_json(c.value("codebook", json{{"size", 6}}));
  EntropyOptions options;
  options.budget = c.value("budget", options.budget);
  options.fallback_samples = c.value("fallback_samples", options.fallback_samples);
  options.seed = ctx.stamp.seed;
  const double tolerance = c.value("tolerance", 0.05);

  struct Cell {
    double power;
    int length;
  };
  std::vector<Cell> cells;
  for (double p : powers) {
    for (int n : lengths) cells.push_back({p, n});
  }
  std::vector<ChannelDensity> instantiated;
  for (const Cell& cell : cells) instantiated.push_back(make_density(spec, cell.power));

  struct Result {
    IntegerCodebook codebook;
    EntropyLedger ledger;
  };
  const auto results = parallel_map(cells.size(), ctx.threads, [&](std::size_t i) {
    Rng rng = make_stream(ctx.stamp.seed, i);
    Result r;
    r.codebook = generate_codebook(book, cells[i].power, cells[i].length, instantiated[i], rng);
    EntropyOptions local = options;
    local.seed = ctx.stamp.seed ^ (0x9e3779b97f4a7c15ULL * (i + 1));
    r.ledger = difference_of_entropies(r.codebook, {}, instantiated[i], local);
    return r;
  });

  double theorem_value = 1.0;
  for (double a : alphas) theorem_value += a;

  Outcome outcome;
  CsvTable grid({"P", "n", "alpha", "H1", "H2", "diff", "normalized_diff", "theorem_value", "exact"});
  json ledgers = json::array();
  std::vector<EntropyLedger> all;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const EntropyLedger& ledger = results[i].ledger;
    all.push_back(ledger);
    grid.row()
        .cell(ledger.power)
        .cell(ledger.length)
        .cell(ledger.alpha)
        .cell(ledger.h_y1)
        .cell(ledger.h_y2)
        .cell(ledger.difference)
        .cell(ledger.normalized_difference)
        .cell(theorem_value)
        .cell(std::string(ledger.exact ? "1" : "0"));
    ledgers.push_back(to_json(ledger));
    std::vector<std::string> broken;
    if (!ledger.chain_holds(1e-9)) broken.push_back("chain identity");
    if (!ledger.jensen_holds(1e-9)) broken.push_back("Jensen chain");
    if (ledger.exact && ledger.h_y2 > ledger.h_y2_cardinality_bound + 1e-9) {
      broken.push_back("output cardinality bound");
    }
    if (ledger.normalizer > 0.0 &&
        ledger.difference > ledger.log_analytic_bound + 1e-9) {
      broken.push_back("analytic set-size bound");
    }
    for (const std::string& what : broken) {
      outcome.reasons.push_back(what + " fails at P=" + format_number(ledger.power) + " n=" +
                                std::to_string(ledger.length));
    }
    if (!broken.empty()) {
      outcome.instances.push_back({{"codebook", codebook_to_json(results[i].codebook)},
                                   {"density", density_to_json(instantiated[i])},
                                   {"ledger", to_json(ledger)}});
    }
  }
  json doc{{"ledgers", ledgers}, {"input_pmf", "uniform over the codebook"}};
  try {
    doc["assembly"] = to_json(assemble_sum_dof_bound(all, alphas, tolerance));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InsufficientData) throw;
    doc["assembly"] = std::string("not fitted: ") + e.what();
  }
  outcome.artifacts.push_back({"entropy_grid.csv", grid.render(ctx.stamp)});
  outcome.artifacts.push_back({"ledgers.json", render_json(doc, ctx.stamp)});
  outcome.summary = std::to_string(cells.size()) + " ledgers, theorem value " +
                    format_number(theorem_value) + "\n";
  return outcome;
}

// ---------------------------------------------------------------------------
// scheme-zf and scheme-bia

json fit_or_message(const std::function<json()>& fit) {
  try {
    return fit();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InsufficientData) throw;
    return std::string("not fitted: ") + e.what();
  }
}

Outcome scheme_zf(const Context& ctx) {
  const json& c = ctx.config;
  require_keys(c, {"seed", "alphas", "powers", "prior", "trials", "M"}, "config");
  const auto alphas = c.value("alphas", std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  const std::vector<double> powers =
      c.contains("powers") ? powers_from_json(c.at("powers")) : power_grid(8.0, 16.0, 0.25);
  DensitySpec prior_spec;
  prior_spec.lo = 0.25;
  prior_spec.hi = 4.0;
  if (c.contains("prior")) prior_spec = density_spec_from_json(c.at("prior"));
  if (prior_spec.alpha) throw UsageError("scheme-zf prior must not carry alpha; feedback sets it");
  const ChannelDensity prior = make_density(prior_spec, 1.0);
  const std::size_t trials = c.value("trials", std::size_t{2000});
  const double bound = c.value("M", std::max({1.0 / prior.lo(), prior.hi(), 1.0 + 1e-9}));
  for (double a : alphas) {
    if (!(a >= 0.0 && a <= 1.0)) throw UsageError("alphas must lie in [0, 1]");
  }

  Outcome outcome;
  CsvTable table({"scheme", "alpha", "P", "B", "R1", "R2", "sum", "residual_power"});
  json summaries = json::array();
  for (double alpha : alphas) {
    std::vector<RatePoint> curve;
    for (double p : powers) {
      curve.push_back(zf_quantized_feedback(p, alpha, prior, trials, ctx.stamp.seed, ctx.threads));
      const RatePoint& point = curve.back();
      table.row()
          .cell(point.scheme)
          .cell(alpha)
          .cell(p)
          .cell(point.feedback_bits)
          .cell(point.r1)
          .cell(point.r2)
          .cell(point.sum())
          .cell(point.residual_power);
      try {
        point.validate(bound);
      } catch (const Error& e) {
        outcome.reasons.push_back(e.what());
        outcome.instances.push_back(to_json(point));
      }
    }
    summaries.push_back({{"alpha", alpha},
                         {"predicted_sum_slope", 1.0 + alpha},
                         {"predicted_residual_exponent", 1.0 - alpha},
                         {"fits", fit_or_message([&] { return to_json(summarize(curve)); })}});
  }
  json doc{{"scheme", "zf-quantized-feedback"},
           {"quantizer", "uniform over the prior support, cell midpoint as estimate"},
           {"prior", density_to_json(prior)},
           {"trials", trials},
           {"summaries", summaries}};
  outcome.artifacts.push_back({"scheme_zf.csv", table.render(ctx.stamp)});
  outcome.artifacts.push_back({"scheme_zf_summary.json", render_json(doc, ctx.stamp)});
  outcome.summary = std::to_string(alphas.size()) + " alpha values x " +
                    std::to_string(powers.size()) + " powers\n";
  return outcome;
}

Outcome scheme_bia(const Context& ctx) {
  const json& c = ctx.config;
  require_keys(c, {"seed", "powers", "trials", "M", "compound_states"}, "config");
  const std::vector<double> powers =
      c.contains("powers") ? powers_from_json(c.at("powers")) : power_grid(4.0, 12.0, 0.5);
  const std::size_t trials = c.value("trials", std::size_t{2000});
  const double bound = c.value("M", 4.0);
  const auto states = c.value("compound_states", std::vector<double>{0.5, 1.5});

  Outcome outcome;
  CsvTable table({"scheme", "alpha", "P", "B", "R1", "R2", "sum", "residual_power"});
  std::vector<RatePoint> curve;
  for (double p : powers) {
    curve.push_back(blind_ia_pn(p, trials, ctx.stamp.seed, bound, ctx.threads));
    const RatePoint& point = curve.back();
    table.row()
        .cell(point.scheme)
        .cell(0.0)
        .cell(p)
        .cell(0)
        .cell(point.r1)
        .cell(point.r2)
        .cell(point.sum())
        .cell(point.residual_power);
    try {
      point.validate(bound);
    } catch (const Error& e) {
      outcome.reasons.push_back(e.what());
      outcome.instances.push_back(to_json(point));
    }
    if (point.residual_power != 0.0) {
      outcome.reasons.push_back("difference combiner left interference at P=" + format_number(p));
      outcome.instances.push_back(to_json(point));
    }
  }
  // A finite-state compound channel has an atomic law; it must be refused.
  json compound{{"states", states}};
  DensitySpec atomic;
  atomic.family = "compound";
  atomic.atoms = states;
  try {
    make_density(atomic, 1.0);
    compound["rejected"] = false;
    outcome.reasons.push_back("atomic compound-channel law was accepted as a density");
    outcome.instances.push_back(compound);
  } catch (const Error& e) {
    compound["rejected"] = e.kind() == ErrorKind::DegenerateDensity;
    compound["reason"] = e.what();
  }
  json doc{{"scheme", "blind-ia-pn"},
           {"M", bound},
           {"trials", trials},
           {"predicted", {{"d1", 1.0}, {"d2", 0.5}, {"sum", 1.5}}},
           {"fits", fit_or_message([&] { return to_json(summarize(curve)); })},
           {"compound_demo", compound}};
  outcome.artifacts.push_back({"scheme_bia.csv", table.render(ctx.stamp)});
  outcome.artifacts.push_back({"scheme_bia_summary.json", render_json(doc, ctx.stamp)});
  outcome.summary = std::to_string(powers.size()) + " powers\n";
  return outcome;
}

// ---------------------------------------------------------------------------
// toy

Rational rational_from_json(const json& j) {
  if (j.is_number_integer()) return {j.get<std::int64_t>(), 1};
  const auto pair = j.get<std::vector<std::int64_t>>();
  if (pair.size() != 2 || pair[1] <= 0) throw UsageError("channels are integers or [num, den>0]");
  return {pair[0], pair[1]};
}

std::string rational_text(const Rational& g) {
  return g.den == 1 ? std::to_string(g.num) : std::to_string(g.num) + "/" + std::to_string(g.den);
}

Outcome toy(const Context& ctx) {
  const json& c = ctx.config;
  require_keys(c, {"seed", "codebook", "channels", "pigeonhole"}, "config");
  std::vector<ToyCodeword> codebook;
  for (const json& pair : c.value("codebook", json::array({{0, 2}, {1, 1}, {2, 0}}))) {
    const auto xy = pair.get<std::vector<Symbol>>();
    if (xy.size() != 2) throw UsageError("toy codewords are [x1, x2] pairs");
    codebook.push_back({xy[0], xy[1]});
  }
  if (codebook.empty()) throw UsageError("toy codebook is empty");
  std::vector<Rational> channels;
  for (const json& g : c.value("channels", json::array({1, 2}))) channels.push_back(rational_from_json(g));
  if (channels.empty()) throw UsageError("toy channel set is empty");

  const ToyReport report = toy_distinct_images(codebook, channels);
  Outcome outcome;
  json doc{{"report", to_json(report)}};
  std::ostringstream summary;
  std::string counts;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    summary << "G=" << rational_text(channels[i]) << ": " << report.image_counts[i] << " images\n";
    counts += (i ? "," : "") + std::to_string(report.image_counts[i]);
  }
  summary << "image counts {" << counts << "}\n";
  if (!report.single_slope_holds) {
    outcome.reasons.push_back("single-slope property fails");
    outcome.instances.push_back({{"codebook", c.value("codebook", json::array())}});
  }
  if (c.contains("pigeonhole")) {
    const json& pj = c.at("pigeonhole");
    require_keys(pj, {"points", "x2_max"}, "pigeonhole");
    const int points = pj.value("points", 9);
    const Symbol x2_max = pj.value("x2_max", Symbol{8});
    const PigeonholeSearch search = toy_pigeonhole_search(points, x2_max, channels);
    doc["pigeonhole"] = to_json(search);
    summary << "pigeonhole: every mapping has a channel with >= " << search.min_max_images
            << " images (sqrt bound " << format_number(std::sqrt(points)) << ")\n";
    if (!search.all_reach_sqrt) {
      outcome.reasons.push_back("a mapping keeps every channel below sqrt(N) images");
      outcome.instances.push_back({{"mapping", search.extremal_mapping}});
    }
  }
  json jchannels = json::array();
  for (const Rational& g : channels) jchannels.push_back(rational_text(g));
  doc["channels"] = jchannels;
  outcome.artifacts.push_back({"toy.json", render_json(doc, ctx.stamp)});
  outcome.summary = summary.str();
  return outcome;
}

// ---------------------------------------------------------------------------

using Handler = Outcome (*)(const Context&);

const std::map<std::string, std::pair<Handler, const char*>>& handlers() {
  static const std::map<std::string, std::pair<Handler, const char*>> table{
      {"canonical-reduce", {canonical_reduce, "Reduce a general 2x2 channel to canonical form"}},
      {"enumerate-sets", {enumerate_sets, "Deterministic outputs and aligned image sets"}},
      {"bound-check", {bound_check, "Alignment probability and set-size bounds over a grid"}},
      {"entropy-grid", {entropy_grid, "Exact entropy ledgers over a (P, n) grid"}},
      {"scheme-zf", {scheme_zf, "Zero-forcing with quantized feedback rate curves"}},
      {"scheme-bia", {scheme_bia, "Blind interference alignment (PN) rate curves"}},
      {"toy", {toy, "Noise-free toy model image counts"}},
  };
  return table;
}

bool is_input_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::BoundViolation:
    case ErrorKind::DegenerateChannel:
    case ErrorKind::DegenerateDensity:
    case ErrorKind::MalformedMapping:
      return true;
    default:
      return false;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Aligned image sets laboratory", "aisets"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "aisets_out";
  int threads = 0;
  for (const auto& [name, entry] : handlers()) {
    CLI::App* sub = app.add_subcommand(name, entry.second);
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--seed", seed, "Override the config seed");
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--threads", threads, "Worker threads (default: AISETS_THREADS or 1)")
        ->check(CLI::PositiveNumber);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }
  const std::string subcommand = app.get_subcommands().front()->get_name();

  Context ctx;
  Outcome outcome;
  try {
    std::ifstream in(config_path);
    if (!in) throw UsageError("cannot read config " + config_path);
    ctx.config = json::parse(in);
    if (!ctx.config.is_object()) throw UsageError("config must be a JSON object");
    if (seed) ctx.config["seed"] = *seed;
    if (!ctx.config.contains("seed")) ctx.config["seed"] = 1;
    ctx.stamp.seed = ctx.config.at("seed").get<std::uint64_t>();
    ctx.stamp.config_hash = config_hash(ctx.config);
    ctx.threads = resolve_threads(threads);
    outcome = handlers().at(subcommand).first(ctx);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return is_input_error(e.kind()) ? kExitUsage : kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }

  try {
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    if (!outcome.reasons.empty()) {
      json dump{{"subcommand", subcommand},
                {"reasons", outcome.reasons},
                {"instances", outcome.instances},
                {"config", ctx.config}};
      write_text(dir / "falsification.json", render_json(dump, ctx.stamp));
    }
    for (const Artifact& artifact : outcome.artifacts) write_text(dir / artifact.name, artifact.contents);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  out << outcome.summary;
  if (!outcome.reasons.empty()) {
    for (const std::string& reason : outcome.reasons) err << "falsified: " << reason << "\n";
    return kExitFalsified;
  }
  return kExitOk;
}

}  // namespace aisets::cli
