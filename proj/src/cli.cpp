#include "xfield/cli.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <list>
#include <map>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "xfield/engine.hpp"
#include "xfield/error.hpp"
#include "xfield/eval.hpp"
#include "xfield/externalfield.hpp"
#include "xfield/io.hpp"
#include "xfield/pathsampler.hpp"
#include "xfield/phantom.hpp"
#include "xfield/plot.hpp"
#include "xfield/random.hpp"
#include "xfield/sequential.hpp"

namespace xfield {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::uint64_t kPhantomNoiseStream = 0x504E;

std::string config_scalar(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number_float()) return io::format_double(v.get<double>());
  throw InvalidConfig("config values must be scalars or arrays of scalars");
}

// Fills options that were not given on the command line from a JSON object
// whose keys are the long flag names without dashes.
void apply_config(CLI::App* sub, const std::string& path) {
  json j;
  try {
    j = json::parse(io::read_text(path));
  } catch (const json::exception& e) {
    throw InvalidConfig(path + ": " + e.what());
  }
  if (!j.is_object()) throw InvalidConfig(path + ": config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    CLI::Option* opt = key == "config" ? nullptr : sub->get_option_no_throw("--" + key);
    if (!opt) throw InvalidConfig(path + ": unknown key '" + key + "' for " + sub->get_name());
    if (opt->count() > 0) continue;
    if (value.is_array())
      for (const auto& e : value) opt->add_result(config_scalar(e));
    else
      opt->add_result(config_scalar(value));
    opt->run_callback();
  }
}

void require(CLI::App* sub, const std::string& flag) {
  if (sub->get_option(flag)->count() == 0) throw InvalidConfig(sub->get_name() + " needs " + flag);
}

struct BetaChoice {
  BetaMode mode = BetaMode::Sample;
  double fixed = 0.0;
};

BetaChoice parse_beta(const std::string& s) {
  if (s == "sample") return {};
  if (s.rfind("fixed=", 0) == 0) {
    const std::string v = s.substr(6);
    char* end = nullptr;
    const double b = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(b) || b < 0.0)
      throw InvalidConfig("--beta fixed=<v> needs a finite non-negative number");
    return {BetaMode::Fixed, b};
  }
  throw InvalidConfig("--beta must be 'sample' or 'fixed=<v>'");
}

std::vector<std::string> class_names(const NoisePriors& priors) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < priors.components.size(); ++j)
    names.push_back(priors.components[j].name.empty() ? std::to_string(j + 1) : priors.components[j].name);
  return names;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// ---------------------------------------------------------------- phantom

struct PhantomArgs {
  std::string spec_path, out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<double> rotation, bias;
};

int cmd_phantom(const PhantomArgs& a) {
  PhantomSpec spec = a.spec_path.empty() ? PhantomSpec::ed_default() : io::read_phantom_spec(a.spec_path);
  if (a.seed) spec.seed = *a.seed;
  if (a.rotation) spec.inner_rotation_deg = *a.rotation;
  if (a.bias) spec.bias_amplitude = *a.bias;
  spec.validate();

  PhantomSpec undisplaced = spec;
  undisplaced.inner_rotation_deg = 0.0;
  undisplaced.translation = {0.0, 0.0};

  const LabelField truth = generate_truth(spec);
  const LabelField reference = generate_truth(undisplaced);
  Rng rng = make_stream(spec.seed, {kPhantomNoiseStream});
  const ImageVolume image = render_image(truth, spec, rng);

  const fs::path out(a.out);
  fs::create_directories(out);
  io::write_labels(out / "truth.vol", spec.lattice, truth);
  io::write_labels(out / "reference.vol", spec.lattice, reference);
  io::write_image(out / "image.vol", image);
  io::write_phantom_spec(out / "phantom.json", spec);
  write_label_png(out / "truth.png", spec.lattice, truth);
  write_gray_png(out / "image.png", spec.lattice, image.values);
  std::cout << "phantom " << spec.lattice.dims[0] << "x" << spec.lattice.dims[1] << ", " << spec.k()
            << " classes, written to " << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- calibrate

struct CalibrateArgs {
  std::vector<std::size_t> dims;
  std::vector<double> voxel;
  int k = 0;
  double grid_max = 2.0, grid_step = 0.05;
  std::size_t sweeps = 1000, burnin = 200;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out = ".";
};

int cmd_calibrate(const CalibrateArgs& a) {
  if (a.k < 1) throw InvalidConfig("calibrate needs --k >= 1");
  const LatticeSpec spec = LatticeSpec::make(a.dims, a.voxel);
  spec.validate();
  const PathTable table =
      calibrate(spec, a.k, make_beta_grid(a.grid_max, a.grid_step), a.sweeps, a.burnin, a.seed, a.workers);
  const fs::path out(a.out);
  fs::create_directories(out);
  io::write_path_table(out / "path_table.csv", table);
  write_line_plot(out / "path_table.png", {{table.beta_grid, table.expected_stat, false}});
  std::cout << "path table with " << table.beta_grid.size() << " grid points written to "
            << (out / "path_table.csv").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- field

struct FieldArgs {
  std::string reference, hyper, mode, out = ".";
  std::optional<double> mu_delta, sigma_delta;
  bool allow_empty = false;
  int workers = 1;
};

int cmd_field(const FieldArgs& a) {
  const auto [spec, reference] = io::read_labels(a.reference);
  DeltaHyper hyper = a.hyper.empty() ? DeltaHyper{} : io::read_delta_hyper(a.hyper);
  if (a.mu_delta) hyper.global.mu = *a.mu_delta;
  if (a.sigma_delta) hyper.global.sigma2 = *a.sigma_delta * *a.sigma_delta;
  hyper.validate();
  const FieldMode mode = a.mode.empty() ? default_field_mode(spec.site_count(), reference.k) : parse_field_mode(a.mode);
  const FieldPrior field = build_field_prior(reference, spec, hyper, mode, {a.allow_empty, a.workers});
  const fs::path out(a.out);
  fs::create_directories(out);
  io::write_field_prior(out / "field.vol", spec, field);
  write_label_png(out / "field_argmax.png", spec, field_argmax(field));
  std::cout << "field prior (" << to_string(mode) << ", " << field.k << " planes) written to "
            << (out / "field.vol").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- segment

struct SegmentArgs {
  std::string image, priors, table, field, truth, beta = "sample", variant, out = ".";
  std::size_t iterations = 5500, burnin = 500, thin = 1;
  double beta_init = 1.0, proposal_sd = 0.01;
  bool no_adapt = false;
  std::uint64_t seed = 1;
  int workers = 1;
};

int cmd_segment(const SegmentArgs& a) {
  const ImageVolume y = io::read_image(a.image);
  const NoisePriors priors = a.priors.empty() ? NoisePriors::ed_phantom() : io::read_noise_priors(a.priors);

  ChainConfig config;
  config.iterations = a.iterations;
  config.burnin = a.burnin;
  config.thin = a.thin;
  config.seed = a.seed;
  config.workers = a.workers;
  config.beta_init = a.beta_init;
  config.proposal_sd = a.proposal_sd;
  config.adapt_proposal = !a.no_adapt;
  const BetaChoice beta = parse_beta(a.beta);
  config.beta_mode = beta.mode;
  config.beta_fixed = beta.fixed;
  config.use_field = !a.field.empty();
  if (config.beta_mode == BetaMode::Sample && a.table.empty())
    throw InvalidConfig("sampling beta needs a path table (--table), or use --beta fixed=<v>");
  config.validate();

  std::optional<PathTable> table;
  if (!a.table.empty()) table = io::read_path_table(a.table);
  std::optional<FieldPrior> field;
  if (config.use_field) {
    auto [fspec, f] = io::read_field_prior(a.field);
    if (fspec.dims != y.spec.dims) throw ShapeError("field prior lattice does not match the image");
    field = std::move(f);
  }
  std::optional<LabelField> truth;
  if (!a.truth.empty()) {
    auto [tspec, t] = io::read_labels(a.truth);
    if (tspec.dims != y.spec.dims) throw ShapeError("truth lattice does not match the image");
    truth = std::move(t);
  }

  const ChainResult r = run_chain(y, config, priors, field ? &*field : nullptr, table ? &*table : nullptr,
                                  truth ? &*truth : nullptr);
  const fs::path out(a.out);
  const auto names = class_names(priors);
  io::write_chain_result(out, y.spec, r, names);
  write_label_png(out / "modal.png", y.spec, r.modal);

  std::vector<double> it(r.beta_trace.size());
  for (std::size_t t = 0; t < it.size(); ++t) it[t] = static_cast<double>(t);
  write_line_plot(out / "beta_trace.png", {{it, r.beta_trace, false}});

  std::string hpd = "parameter,level,lower,upper\n";
  if (r.retained >= 2) {
    const std::vector<double> kept(r.beta_trace.begin() + static_cast<long>(r.burnin), r.beta_trace.end());
    const auto [lo, hi] = hpd_interval(kept, 0.95);
    hpd += "beta,0.95," + io::format_double(lo) + "," + io::format_double(hi) + "\n";
  }
  io::write_text(out / "hpd.csv", hpd);

  if (truth) {
    const ScoreReport s = score(r.modal, *truth);
    io::ScoreFile sf;
    sf.variant = a.variant.empty() ? (config.use_field ? "with_field" : "without_field") : a.variant;
    sf.names = names;
    sf.names.resize(s.dice.size());
    for (std::size_t j = 0; j < sf.names.size(); ++j)
      if (sf.names[j].empty()) sf.names[j] = std::to_string(j + 1);
    sf.dice = s.dice;
    sf.misclassification = s.misclassification;
    sf.beta_mean = r.posterior_mean_beta();
    sf.sigma_delta = field ? std::sqrt(field->hyper.global.sigma2) : std::numeric_limits<double>::quiet_NaN();
    io::write_score_file(out / "scores.csv", sf);

    std::string conf = "truth\\predicted";
    for (int p = 1; p <= s.k; ++p) conf += "," + std::to_string(p);
    conf += "\n";
    for (int t = 1; t <= s.k; ++t) {
      conf += std::to_string(t);
      for (int p = 1; p <= s.k; ++p) conf += "," + std::to_string(s.confusion[static_cast<std::size_t>((t - 1) * s.k + p - 1)]);
      conf += "\n";
    }
    io::write_text(out / "confusion.csv", conf);
    std::cout << "misclassification " << io::format_double(s.misclassification) << "\n";
  }
  std::cout << "posterior mean beta " << io::format_double(r.posterior_mean_beta()) << ", results in "
            << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- update

struct UpdateArgs {
  std::vector<std::string> chains;
  std::string reference, delta_prior, mode, out = ".";
  std::optional<double> n_prior;
  bool bias_correction = false, allow_empty = false;
  int workers = 1;
};

int cmd_update(const UpdateArgs& a) {
  if (a.chains.empty()) throw InvalidConfig("update needs at least one --chain directory");
  const auto [spec, reference] = io::read_labels(a.reference);
  const int k = reference.k;

  DeltaPriorState prior;
  if (!a.delta_prior.empty()) {
    prior = io::read_delta_prior(a.delta_prior);
  } else {
    prior.per_label.assign(static_cast<std::size_t>(k), DeltaPrior{a.n_prior.value_or(1.0), 1.2, 7.3 * 7.3});
  }
  if (prior.per_label.size() != static_cast<std::size_t>(k))
    throw ShapeError("delta prior has " + std::to_string(prior.per_label.size()) + " labels, reference has " +
                     std::to_string(k));
  prior.validate();

  std::vector<DistanceField> dists(static_cast<std::size_t>(k));
  const auto present = reference.counts();
  for (int j = 1; j <= k; ++j)
    if (present[static_cast<std::size_t>(j)] > 0) dists[static_cast<std::size_t>(j - 1)] = distance_transform(reference, spec, j);

  // Batches are pooled into one set of sufficient statistics.
  std::optional<DeltaSufficientStats> pooled;
  std::optional<LabelWeights> first_weights;
  for (const auto& dir : a.chains) {
    const ChainResult r = io::read_chain_result(dir);
    if (r.n != spec.site_count() || r.k != k) throw ShapeError(dir + ": chain shape does not match the reference");
    const LabelWeights w = posterior_weights(r);
    if (!first_weights) first_weights = w;
    auto stats = delta_sufficient_stats(w, dists);
    if (!pooled) {
      pooled = std::move(stats);
    } else {
      for (std::size_t j = 0; j < pooled->per_label.size(); ++j)
        pooled->per_label[j] = pool_stats(pooled->per_label[j], stats.per_label[j]);
    }
  }
  if (a.bias_correction) {
    std::vector<double> offset(static_cast<std::size_t>(k), 0.0);
    for (int j = 1; j <= k; ++j)
      if (present[static_cast<std::size_t>(j)] > 0)
        offset[static_cast<std::size_t>(j - 1)] = intra_object_mean_distance(reference, spec, j);
    *pooled = add_distance_offset(*pooled, offset);
  }
  const DeltaPriorState updated = update_delta_hyperparams(prior, *pooled);

  const fs::path out(a.out);
  fs::create_directories(out);
  io::write_delta_prior(out / "delta_prior.json", updated);
  std::string csv = "label,nu_hat,m_hat,s2_hat,n_post,mu_post,sigma2_post\n";
  for (std::size_t j = 0; j < updated.per_label.size(); ++j) {
    const auto& s = pooled->per_label[j];
    const auto& p = updated.per_label[j];
    csv += std::to_string(j + 1) + "," + io::format_double(s.nu_hat) + "," + io::format_double(s.m_hat) + "," +
           io::format_double(s.s2_hat) + "," + io::format_double(p.n_prior) + "," + io::format_double(p.mu_prior) +
           "," + io::format_double(p.sigma2_prior) + "\n";
  }
  io::write_text(out / "delta_stats.csv", csv);
  io::write_planes(out / "weights.vol", spec, first_weights->w, static_cast<std::size_t>(k));

  const FieldMode mode = a.mode.empty() ? default_field_mode(spec.site_count(), k) : parse_field_mode(a.mode);
  const FieldPrior field = refresh_field_prior(reference, spec, updated.to_hyper(), mode, {a.allow_empty, a.workers});
  io::write_field_prior(out / "field.vol", spec, field);
  std::cout << "updated displacement prior from " << a.chains.size() << " chain(s) written to " << out.string()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------- report

struct ReportArgs {
  std::vector<std::string> scores;
  std::string out = ".";
};

int cmd_report(const ReportArgs& a) {
  if (a.scores.empty()) throw InvalidConfig("report needs at least one score file");
  std::vector<io::ScoreFile> files;
  for (const auto& p : a.scores) files.push_back(io::read_score_file(p));

  std::string summary = "file,variant,sigma_delta,misclassification,beta_mean,mean_dice\n";
  std::map<double, std::vector<const io::ScoreFile*>> by_sigma;
  for (std::size_t f = 0; f < files.size(); ++f) {
    const auto& s = files[f];
    double mean_dice = 0.0;
    for (double d : s.dice) mean_dice += d;
    if (!s.dice.empty()) mean_dice /= static_cast<double>(s.dice.size());
    summary += a.scores[f] + "," + s.variant + "," + io::format_double(s.sigma_delta) + "," +
               io::format_double(s.misclassification) + "," + io::format_double(s.beta_mean) + "," +
               io::format_double(mean_dice) + "\n";
    if (std::isfinite(s.sigma_delta)) by_sigma[s.sigma_delta].push_back(&s);
  }
  const fs::path out(a.out);
  fs::create_directories(out);
  io::write_text(out / "summary.csv", summary);

  std::vector<double> sig, med_mis, med_beta;
  std::string trends = "sigma_delta,runs,median_misclassification,median_beta_mean\n";
  for (const auto& [sd, group] : by_sigma) {
    std::vector<double> mis, beta;
    for (const auto* s : group) {
      mis.push_back(s->misclassification);
      beta.push_back(s->beta_mean);
    }
    sig.push_back(sd);
    med_mis.push_back(median(mis));
    med_beta.push_back(median(beta));
    trends += io::format_double(sd) + "," + std::to_string(group.size()) + "," + io::format_double(med_mis.back()) +
              "," + io::format_double(med_beta.back()) + "\n";
  }
  io::write_text(out / "trends.csv", trends);
  if (sig.size() >= 2) {
    io::write_text(out / "spearman.csv", "metric,rho\nmisclassification," +
                                             io::format_double(spearman(sig, med_mis)) + "\nbeta_mean," +
                                             io::format_double(spearman(sig, med_beta)) + "\n");
    write_line_plot(out / "misclassification_vs_sigma.png", {{sig, med_mis, false}, {sig, med_mis, true}});
    write_line_plot(out / "beta_vs_sigma.png", {{sig, med_beta, false}, {sig, med_beta, true}});
  }
  std::cout << "report over " << files.size() << " score file(s) written to " << out.string() << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Hidden Potts segmentation with an external field prior"};
  app.require_subcommand(1);
  std::function<int()> action;
  std::list<std::string> config_paths;
  std::vector<std::pair<CLI::App*, std::string*>> configs;
  auto add_config = [&](CLI::App* sub) {
    auto& path = config_paths.emplace_back();
    sub->add_option("--config", path, "JSON file of option values; command-line flags win");
    configs.emplace_back(sub, &path);
  };

  PhantomArgs pa;
  auto* ph = app.add_subcommand("phantom", "Generate ground truth, reference and image volumes");
  add_config(ph);
  ph->add_option("--spec", pa.spec_path, "Phantom specification (JSON)");
  ph->add_option("--seed", pa.seed, "Noise and bias seed");
  ph->add_option("--rotation", pa.rotation, "Inner-ring rotation in degrees");
  ph->add_option("--bias-amplitude", pa.bias, "Bias-field amplitude");
  ph->add_option("--out", pa.out, "Output directory");
  ph->callback([&] { action = [&] { return cmd_phantom(pa); }; });

  CalibrateArgs ca;
  auto* cal = app.add_subcommand("calibrate", "Tabulate E[S(z)|beta] by Swendsen-Wang simulation");
  add_config(cal);
  cal->add_option("--dims", ca.dims, "Lattice dimensions, e.g. 128,128")->delimiter(',');
  cal->add_option("--voxel-size", ca.voxel, "Voxel size per axis in mm")->delimiter(',');
  cal->add_option("--k", ca.k, "Number of labels");
  cal->add_option("--grid-max", ca.grid_max, "Largest beta on the grid");
  cal->add_option("--grid-step", ca.grid_step, "Grid spacing");
  cal->add_option("--sweeps", ca.sweeps, "Sweeps per grid point");
  cal->add_option("--burnin", ca.burnin, "Discarded sweeps per grid point");
  cal->add_option("--seed", ca.seed);
  cal->add_option("--workers", ca.workers);
  cal->add_option("--out", ca.out, "Output directory");
  cal->callback([&] { action = [&] { return cmd_calibrate(ca); }; });

  FieldArgs fa;
  auto* fld = app.add_subcommand("field", "Build the external field prior from a reference labelling");
  add_config(fld);
  fld->add_option("--reference", fa.reference, "Reference label volume");
  fld->add_option("--hyper", fa.hyper, "Displacement hyperparameters (JSON)");
  fld->add_option("--mu-delta", fa.mu_delta, "Mean displacement in mm");
  fld->add_option("--sigma-delta", fa.sigma_delta, "Displacement standard deviation in mm");
  fld->add_option("--mode", fa.mode, "exact|approx");
  fld->add_flag("--allow-empty", fa.allow_empty, "Floor labels absent from the reference");
  fld->add_option("--workers", fa.workers);
  fld->add_option("--out", fa.out, "Output directory");
  fld->callback([&] { action = [&] { return cmd_field(fa); }; });

  SegmentArgs sa;
  auto* seg = app.add_subcommand("segment", "Run the MCMC segmentation");
  add_config(seg);
  seg->add_option("--image", sa.image, "Image volume");
  seg->add_option("--priors", sa.priors, "Mixture priors (JSON); default is the nine-tissue phantom set");
  seg->add_option("--table", sa.table, "Path table CSV");
  seg->add_option("--field", sa.field, "Field prior volume; omit to segment without it");
  seg->add_option("--truth", sa.truth, "Ground-truth labels for scoring");
  seg->add_option("--beta", sa.beta, "sample|fixed=<v>");
  seg->add_option("--beta-init", sa.beta_init);
  seg->add_option("--proposal-sd", sa.proposal_sd);
  seg->add_flag("--no-adapt", sa.no_adapt, "Keep the proposal scale fixed during burn-in");
  seg->add_option("--iterations", sa.iterations);
  seg->add_option("--burnin", sa.burnin);
  seg->add_option("--thin", sa.thin);
  seg->add_option("--variant", sa.variant, "Name written in the score file header");
  seg->add_option("--seed", sa.seed);
  seg->add_option("--workers", sa.workers);
  seg->add_option("--out", sa.out, "Output directory");
  seg->callback([&] { action = [&] { return cmd_segment(sa); }; });

  UpdateArgs ua;
  auto* upd = app.add_subcommand("update", "Update displacement hyperparameters from fitted chains");
  add_config(upd);
  upd->add_option("--chain", ua.chains, "Chain output directory; repeat to pool batches");
  upd->add_option("--reference", ua.reference, "Reference label volume");
  upd->add_option("--delta-prior", ua.delta_prior, "Current displacement prior state (JSON)");
  upd->add_option("--n-prior", ua.n_prior, "Prior pseudo-count when starting from the default hyperparameters (default 1)");
  upd->add_flag("--bias-correction", ua.bias_correction, "Add the mean intra-object distance to m_hat");
  upd->add_option("--mode", ua.mode, "exact|approx for the refreshed field");
  upd->add_flag("--allow-empty", ua.allow_empty);
  upd->add_option("--workers", ua.workers);
  upd->add_option("--out", ua.out, "Output directory");
  upd->callback([&] { action = [&] { return cmd_update(ua); }; });

  ReportArgs ra;
  auto* rep = app.add_subcommand("report", "Summarise score files and plot trends over sigma_delta");
  add_config(rep);
  rep->add_option("scores", ra.scores, "Score CSV files");
  rep->add_option("--out", ra.out, "Output directory");
  rep->callback([&] { action = [&] { return cmd_report(ra); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    for (auto& [sub, path] : configs)
      if (sub->parsed() && !path->empty()) apply_config(sub, *path);
    if (cal->parsed()) {
      require(cal, "--dims");
      require(cal, "--k");
    } else if (fld->parsed()) {
      require(fld, "--reference");
    } else if (seg->parsed()) {
      require(seg, "--image");
    } else if (upd->parsed()) {
      require(upd, "--reference");
    }
    return action();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("xfield");
  for (const auto& s : args) argv.push_back(s.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace xfield
