#include "parserank/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "parserank/corpus.hpp"
#include "parserank/diagnostics.hpp"
#include "parserank/errors.hpp"
#include "parserank/evalharness.hpp"
#include "parserank/optim_anneal.hpp"
#include "parserank/optim_cg.hpp"
#include "parserank/params_io.hpp"
#include "parserank/synthlab.hpp"

namespace parserank::cli {

using nlohmann::ordered_json;

namespace {

struct CommonOptions {
  std::string corpus_path;
  std::string drop_features_path;
  bool json = false;
  int jobs = 1;
  bool nondeterministic = false;

  ExecPolicy exec() const { return ExecPolicy{std::max(1, jobs), !nondeterministic}; }
};

struct TrainingOptions {
  // Pseudo-likelihood
  double sigma_multiplier = 7.0;
  bool unregularized = false;
  std::size_t max_iter = CgConfig{}.max_iterations;
  double tol = CgConfig{}.objective_rel_tol;
  double grad_tol = CgConfig{}.gradient_norm_tol;
  // Annealing
  double t0 = AnnealConfig{}.initial_temperature;
  double cooling = AnnealConfig{}.cooling_factor;
  std::size_t moves = 0;
  double tmin = AnnealConfig{}.min_temperature;
  double box = AnnealConfig{}.parameter_box;
  double simplex_scale = AnnealConfig{}.simplex_scale;
  std::size_t chains = 1;
  std::uint64_t seed = 0;

  EstimatorSettings settings(const ExecPolicy& exec) const {
    EstimatorSettings s;
    s.cg.max_iterations = max_iter;
    s.cg.objective_rel_tol = tol;
    s.cg.gradient_norm_tol = grad_tol;
    s.pl.sigma_multiplier = sigma_multiplier;
    s.pl.regularize = !unregularized;
    s.pl.exec = exec;
    s.anneal.initial_temperature = t0;
    s.anneal.cooling_factor = cooling;
    s.anneal.moves_per_temperature = moves;
    s.anneal.min_temperature = tmin;
    s.anneal.parameter_box = box;
    s.anneal.simplex_scale = simplex_scale;
    s.anneal.seed = seed;
    s.chains = chains;
    return s;
  }
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_corpus = true) {
  if (with_corpus) cmd->add_option("corpus", o.corpus_path, "Corpus file (JSON Lines)")->required();
  cmd->add_option("--drop-features", o.drop_features_path, "File listing feature names to discard, one per line");
  cmd->add_flag("--json", o.json, "Print JSON instead of a table");
  cmd->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--nondeterministic", o.nondeterministic,
                "Allow thread-order-dependent floating-point reductions");
}

void add_pl_flags(CLI::App* cmd, TrainingOptions& t) {
  cmd->add_option("--sigma-multiplier", t.sigma_multiplier, "Prior width as a multiple of max |f_j|");
  cmd->add_flag("--unregularized", t.unregularized, "Maximize plain log PL (no prior)");
  cmd->add_option("--max-iter", t.max_iter, "CG iteration limit");
  cmd->add_option("--tol", t.tol, "CG relative objective tolerance");
  cmd->add_option("--grad-tol", t.grad_tol, "CG gradient max-norm tolerance");
}

void add_anneal_flags(CLI::App* cmd, TrainingOptions& t) {
  cmd->add_option("--t0", t.t0, "Initial annealing temperature");
  cmd->add_option("--cooling", t.cooling, "Geometric cooling factor in (0,1)");
  cmd->add_option("--moves", t.moves, "Simplex moves per temperature (0 = 100 x parameters)");
  cmd->add_option("--tmin", t.tmin, "Final temperature");
  cmd->add_option("--box", t.box, "Bound on |theta_j|");
  cmd->add_option("--simplex-scale", t.simplex_scale, "Initial simplex vertex offset");
  cmd->add_option("--chains", t.chains, "Independent annealing chains")->check(CLI::PositiveNumber);
}

Corpus load_input(const CommonOptions& o) {
  Corpus corpus = load_corpus(o.corpus_path);
  if (o.drop_features_path.empty()) return corpus;
  std::ifstream in(o.drop_features_path);
  if (!in) throw DataError("cannot open feature filter '" + o.drop_features_path + "'");
  std::vector<std::string> names;
  for (std::string line; std::getline(in, line);) {
    line.erase(0, line.find_first_not_of(" \t\r"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (!line.empty() && line[0] != '#') names.push_back(line);
  }
  return drop_features(corpus, names);
}

std::string fmt(double v, int precision) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

// Two-column text table; labels left-aligned, values right-aligned.
void print_table(std::ostream& out, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size(), 0);
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == 0) {
        out << std::left << std::setw(static_cast<int>(width[c])) << cells[c];
      } else {
        out << "  " << std::right << std::setw(static_cast<int>(width[c])) << cells[c];
      }
    }
    out << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
}

void write_json_file(const std::string& path, const ordered_json& doc) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write '" + path + "'");
  f << doc.dump(2) << '\n';
}

ordered_json settings_json(const EstimatorSettings& s, bool with_pl, bool with_anneal) {
  ordered_json j = ordered_json::object();
  if (with_pl) {
    j["sigma_multiplier"] = s.pl.sigma_multiplier;
    j["regularize"] = s.pl.regularize;
    j["cg_max_iterations"] = s.cg.max_iterations;
    j["cg_objective_rel_tol"] = s.cg.objective_rel_tol;
    j["cg_gradient_norm_tol"] = s.cg.gradient_norm_tol;
    j["cg_line_search_tol"] = s.cg.line_search_tol;
    j["cg_restart_period"] = s.cg.restart_period == 0 ? "active_parameters" : std::to_string(s.cg.restart_period);
  }
  if (with_anneal) {
    j["anneal_initial_temperature"] = s.anneal.initial_temperature;
    j["anneal_cooling_factor"] = s.anneal.cooling_factor;
    j["anneal_moves_per_temperature"] =
        s.anneal.moves_per_temperature == 0 ? "100_x_parameters" : std::to_string(s.anneal.moves_per_temperature);
    j["anneal_min_temperature"] = s.anneal.min_temperature;
    j["anneal_parameter_box"] = s.anneal.parameter_box;
    j["anneal_simplex_scale"] = s.anneal.simplex_scale;
    j["anneal_seed"] = s.anneal.seed;
    j["anneal_chains"] = s.chains;
    j["tie_tolerance"] = s.anneal.tie_tol;
  }
  return j;
}

void print_settings(std::ostream& out, const ordered_json& settings) {
  for (auto it = settings.begin(); it != settings.end(); ++it) {
    out << "# " << it.key() << " = " << (it.value().is_string() ? it.value().get<std::string>() : it.value().dump())
        << '\n';
  }
}

ordered_json scores_json(const EvalScores& s) {
  return ordered_json{{"n_test", s.n_test},
                      {"correct_count", s.correct_count},
                      {"correct_percent", s.correct_percent},
                      {"neg_log_pl", s.neg_log_pl}};
}

// ---- subcommands -----------------------------------------------------------

int cmd_stats(const CommonOptions& o, std::ostream& out) {
  const Corpus corpus = load_input(o);
  const auto st = corpus_stats(corpus);
  if (o.json) {
    out << ordered_json{{"n_sentences", st.n_sentences},
                        {"n_ambiguous", st.n_ambiguous},
                        {"n_parses_of_ambiguous", st.n_parses_of_ambiguous}}
               .dump(2)
        << '\n';
    return kSuccess;
  }
  print_table(out, {"", o.corpus_path},
              {{"Number of sentences", std::to_string(st.n_sentences)},
               {"Number of ambiguous sentences", std::to_string(st.n_ambiguous)},
               {"Number of parses of ambiguous sentences", std::to_string(st.n_parses_of_ambiguous)}});
  return kSuccess;
}

int cmd_diagnose(const CommonOptions& o, const std::string& report_path, std::ostream& out) {
  const Corpus corpus = load_input(o);
  const auto rep = diagnose(corpus, o.exec().jobs);
  ordered_json doc;
  doc["n_features"] = rep.n_features;
  doc["n_rule_features"] = rep.n_rule_features;
  doc["n_pseudo_constant"] = rep.n_pseudo_constant;
  doc["n_pseudo_maximal"] = rep.n_pseudo_maximal;
  doc["n_pseudo_minimal"] = rep.n_pseudo_minimal;
  doc["features"] = ordered_json::array();
  for (const auto& d : rep.features) {
    ordered_json f;
    f["feature"] = corpus.catalog().name(d.feature);
    f["pseudo_constant"] = d.pseudo_constant;
    f["pseudo_maximal"] = d.pseudo_maximal;
    f["pseudo_minimal"] = d.pseudo_minimal;
    f["varies_in"] = d.varies_in ? ordered_json(*d.varies_in) : ordered_json(nullptr);
    f["exceeds_correct_in"] = d.exceeds_correct_in ? ordered_json(*d.exceeds_correct_in) : ordered_json(nullptr);
    f["below_correct_in"] = d.below_correct_in ? ordered_json(*d.below_correct_in) : ordered_json(nullptr);
    doc["features"].push_back(std::move(f));
  }
  if (!report_path.empty()) write_json_file(report_path, doc);
  if (o.json) {
    out << doc.dump(2) << '\n';
    return kSuccess;
  }
  print_table(out, {"", o.corpus_path},
              {{"Number of features", std::to_string(rep.n_features)},
               {"Number of rule features", std::to_string(rep.n_rule_features)},
               {"Number of pseudo-constant features", std::to_string(rep.n_pseudo_constant)},
               {"Number of pseudo-maximal features", std::to_string(rep.n_pseudo_maximal)},
               {"Number of pseudo-minimal features", std::to_string(rep.n_pseudo_minimal)}});
  return kSuccess;
}

int cmd_train(const CommonOptions& o, const TrainingOptions& t, const std::string& estimator_name,
              const std::string& output, const std::string& trace_path, std::ostream& out, std::ostream& err) {
  const Estimator estimator = parse_estimator(estimator_name);
  if (estimator == Estimator::baseline) throw ConfigError("train supports --estimator pl or correct");
  const Corpus corpus = load_input(o);
  const EstimatorSettings settings = t.settings(o.exec());

  ordered_json trace;
  trace["estimator"] = estimator_key(estimator);
  trace["corpus"] = o.corpus_path;
  trace["settings"] = settings_json(settings, estimator == Estimator::pseudo_likelihood,
                                    estimator == Estimator::correct_parses);
  trace["settings"]["seed"] = t.seed;
  trace["settings"]["jobs"] = o.exec().jobs;
  trace["settings"]["deterministic"] = o.exec().deterministic;

  ParameterVector theta;
  std::vector<bool> frozen(corpus.num_features(), false);
  if (estimator == Estimator::pseudo_likelihood) {
    const auto result = train_pl(corpus, settings.cg, settings.pl);
    theta = result.theta;
    for (std::size_t j = 0; j < frozen.size(); ++j) frozen[j] = !result.regularizer.active[j];
    trace["termination"] = to_string(result.trace.reason);
    trace["evaluations"] = result.trace.evaluations;
    trace["initial_objective"] = result.trace.initial_objective;
    trace["iterations"] = ordered_json::array();
    for (const auto& it : result.trace.iterations) {
      trace["iterations"].push_back(ordered_json{{"objective", it.objective},
                                                 {"gradient_norm", it.gradient_norm},
                                                 {"step", it.step},
                                                 {"restarted", it.restarted}});
    }
    trace["warnings"] = result.warnings;
    for (const auto& w : result.warnings) err << "warning: " << w << '\n';
  } else {
    const auto result =
        maximize_correct_chains(corpus, baseline_params(corpus.catalog()), settings.anneal, settings.chains, o.jobs);
    theta = result.theta;
    trace["termination"] = result.trace.reason;
    trace["evaluations"] = result.trace.evaluations;
    trace["best_C"] = result.best_C;
    trace["best_log_pl"] = result.best_log_pl;
    trace["final_temperature"] = result.trace.final_temperature;
    trace["stages"] = ordered_json::array();
    for (const auto& s : result.trace.stages) {
      trace["stages"].push_back(ordered_json{
          {"temperature", s.temperature}, {"best_C", s.best_C}, {"acceptance_rate", s.acceptance_rate}});
    }
  }

  if (output.empty() || output == "-") {
    write_parameters(out, corpus.catalog(), theta, frozen);
  } else {
    save_parameters(output, corpus.catalog(), theta, frozen);
  }
  if (!trace_path.empty()) write_json_file(trace_path, trace);
  if (!output.empty() && output != "-") {
    const auto scores = evaluate(theta, corpus, o.exec());
    if (o.json) {
      out << ordered_json{{"training_scores", scores_json(scores)}, {"settings", trace["settings"]},
                          {"termination", trace["termination"]}}
                 .dump(2)
          << '\n';
    } else {
      print_settings(out, trace["settings"]);
      out << "# termination = " << trace["termination"].get<std::string>() << '\n';
      print_table(out, {"", "C", "-log PL"},
                  {{"Training corpus", fmt(scores.correct_percent, 1) + "%", fmt(scores.neg_log_pl, 3)}});
    }
  }
  return kSuccess;
}

int cmd_evaluate(const CommonOptions& o, const std::string& params_path, std::ostream& out) {
  const Corpus corpus = load_input(o);
  const auto params = params_path.empty() ? ParameterFile{baseline_params(corpus.catalog()), {}}
                                          : load_parameters(params_path, corpus.catalog());
  const auto s = evaluate(params.params, corpus, o.exec());
  if (o.json) {
    out << scores_json(s).dump(2) << '\n';
    return kSuccess;
  }
  print_table(out, {"", "C", "C%", "-log PL"},
              {{params_path.empty() ? "baseline" : params_path, fmt(s.correct_count, 3), fmt(s.correct_percent, 1),
                fmt(s.neg_log_pl, 3)}});
  return kSuccess;
}

int cmd_crossval(const CommonOptions& o, const TrainingOptions& t, std::size_t k, const std::string& estimators_csv,
                 const std::string& report_path, std::ostream& out) {
  std::vector<Estimator> estimators;
  std::stringstream ss(estimators_csv);
  for (std::string name; std::getline(ss, name, ',');) {
    if (!name.empty()) estimators.push_back(parse_estimator(name));
  }
  if (estimators.empty()) throw ConfigError("--estimators is empty");
  const Corpus corpus = load_input(o);
  const EstimatorSettings settings = t.settings(ExecPolicy{1, !o.nondeterministic});
  const auto report = cross_validate(corpus, k, estimators, t.seed, settings, o.exec().jobs);

  const bool any_pl = std::count(estimators.begin(), estimators.end(), Estimator::pseudo_likelihood) > 0;
  const bool any_anneal = std::count(estimators.begin(), estimators.end(), Estimator::correct_parses) > 0;
  ordered_json doc;
  doc["corpus"] = o.corpus_path;
  doc["k"] = k;
  doc["seed"] = t.seed;
  doc["settings"] = settings_json(settings, any_pl, any_anneal);
  doc["rows"] = ordered_json::array();
  for (std::size_t r = 0; r < estimators.size(); ++r) {
    ordered_json row = scores_json(report.overall[r]);
    row["estimator"] = estimator_key(estimators[r]);
    row["folds"] = ordered_json::array();
    for (const auto& f : report.folds) row["folds"].push_back(scores_json(f.scores[r]));
    doc["rows"].push_back(std::move(row));
  }
  if (!report_path.empty()) write_json_file(report_path, doc);
  if (o.json) {
    out << doc.dump(2) << '\n';
    return kSuccess;
  }
  out << "# corpus = " << o.corpus_path << '\n' << "# k = " << k << '\n' << "# seed = " << t.seed << '\n';
  print_settings(out, doc["settings"]);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t r = 0; r < estimators.size(); ++r) {
    rows.push_back({estimator_label(estimators[r]), fmt(report.overall[r].correct_percent, 1) + "%",
                    fmt(report.overall[r].neg_log_pl, 3)});
  }
  print_table(out, {"", "C(test)", "-log PL(test)"}, rows);
  return kSuccess;
}

int cmd_synth(const std::string& universe_path, const std::string& theta_path, std::size_t n, std::uint64_t seed,
              const std::string& yields, const std::string& output, std::ostream& out) {
  FiniteUniverse universe = load_universe(universe_path);
  ParameterVector theta = theta_path.empty() ? ParameterVector::zeros(universe.catalog().size())
                                             : load_parameters(theta_path, universe.catalog()).params;
  GenerateOptions options;
  if (yields == "uniform") {
    options.sampling = YieldSampling::uniform;
  } else if (yields == "joint") {
    options.sampling = YieldSampling::joint;
  } else {
    throw ConfigError("--yields must be 'uniform' or 'joint'");
  }
  const Corpus corpus = generate_corpus(GroundTruth{std::move(theta), std::move(universe)}, n, seed, options);
  if (output.empty() || output == "-") {
    write_corpus(out, corpus);
  } else {
    save_corpus(output, corpus);
  }
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Log-linear parse ranking: estimation, diagnostics and evaluation", "parserank"};
  app.require_subcommand(1);

  CommonOptions common;
  TrainingOptions training;

  auto* stats = app.add_subcommand("stats", "Corpus statistics");
  add_common(stats, common);

  std::string report_path;
  auto* diag = app.add_subcommand("diagnose", "Pseudo-constant / pseudo-maximal / pseudo-minimal features");
  add_common(diag, common);
  diag->add_option("--report", report_path, "Write the per-feature JSON report with witnesses");

  std::string estimator = "pl", output, trace_path;
  auto* train = app.add_subcommand("train", "Estimate parameters");
  add_common(train, common);
  train->add_option("--estimator", estimator, "pl or correct")->check(CLI::IsMember({"pl", "correct"}));
  train->add_option("-o,--output", output, "Parameter file to write ('-' for stdout)");
  train->add_option("--trace", trace_path, "Write the optimizer trace as JSON");
  train->add_option("--seed", training.seed, "Random seed");
  add_pl_flags(train, training);
  add_anneal_flags(train, training);

  std::string params_path;
  auto* eval = app.add_subcommand("evaluate", "Score parameters on a test corpus");
  add_common(eval, common);
  eval->add_option("--params", params_path, "Parameter file (omit for the baseline)");

  std::size_t k = 10;
  std::string estimators_csv = "baseline,pl,correct";
  auto* cv = app.add_subcommand("crossval", "k-fold cross-validation");
  add_common(cv, common);
  cv->add_option("--k", k, "Number of folds");
  cv->add_option("--seed", training.seed, "Fold-assignment and annealing seed");
  cv->add_option("--estimators", estimators_csv, "Comma-separated subset of baseline,pl,correct");
  cv->add_option("--report", report_path, "Write the JSON report to this file as well");
  add_pl_flags(cv, training);
  add_anneal_flags(cv, training);

  std::string universe_path, theta_path, yields = "uniform";
  std::size_t n = 100;
  auto* synth = app.add_subcommand("synth", "Generate a corpus from a finite universe");
  synth->add_option("--universe", universe_path, "Universe file")->required();
  synth->add_option("--theta", theta_path, "Ground-truth parameter file (default: all zero)");
  synth->add_option("--n", n, "Number of sentences")->check(CLI::PositiveNumber);
  synth->add_option("--seed", training.seed, "Random seed");
  synth->add_option("--yields", yields, "Yield distribution: uniform or joint");
  synth->add_option("-o,--output", output, "Corpus file to write ('-' for stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kUsageError;
  }

  try {
    if (stats->parsed()) return cmd_stats(common, out);
    if (diag->parsed()) return cmd_diagnose(common, report_path, out);
    if (train->parsed()) return cmd_train(common, training, estimator, output, trace_path, out, err);
    if (eval->parsed()) return cmd_evaluate(common, params_path, out);
    if (cv->parsed()) return cmd_crossval(common, training, k, estimators_csv, report_path, out);
    if (synth->parsed()) return cmd_synth(universe_path, theta_path, n, training.seed, yields, output, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalError;
  }
  return kUsageError;
}

}  // namespace parserank::cli
