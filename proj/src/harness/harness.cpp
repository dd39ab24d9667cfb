#include "ensbench/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>
#include <tuple>

#include <boost/math/distributions/binomial.hpp>

#include "ensbench/encoding.hpp"
#include "ensbench/noise.hpp"
#include "ensbench/random.hpp"
#include "ensbench/sampling.hpp"
#include "ensbench/tree.hpp"

namespace ensbench {
namespace {

bool contains(const std::vector<Method>& methods, Method m) {
  return std::find(methods.begin(), methods.end(), m) != methods.end();
}

bool contains(const std::vector<LearnerKind>& learners, LearnerKind k) {
  return std::find(learners.begin(), learners.end(), k) != learners.end();
}

std::unique_ptr<Learner> make_learner(LearnerKind kind, const NetworkConfig& network) {
  if (kind == LearnerKind::tree) return std::make_unique<TreeLearner>();
  return std::make_unique<NetworkLearner>(network);
}

// Misclassification counts on one held-out fold, one per prefix size.
std::vector<std::size_t> evaluate_fold(const Dataset& data, const FoldPlan& plan, std::size_t fold,
                                       const Learner& learner, Method method,
                                       std::size_t members, std::uint64_t seed,
                                       const std::vector<std::size_t>& prefixes) {
  const Dataset train = data.subset(plan.train_rows(fold));
  const Ensemble ensemble = build_ensemble(method, learner, train, members, seed);
  std::vector<std::size_t> wrong(prefixes.size(), 0);
  for (std::size_t r : plan.test_rows(fold)) {
    const Example& ex = data.example(r);
    const auto labels = combine_prefixes(ensemble, ex, prefixes);
    for (std::size_t i = 0; i < labels.size(); ++i) wrong[i] += labels[i] != ex.label;
  }
  return wrong;
}

struct FoldJob {
  std::size_t dataset;
  LearnerKind learner;
  Method method;
  std::size_t run;
  std::size_t fold;
};

// One k-fold pass over each prepared dataset. Dataset d is seeded under
// seed_names[d] and reported with run index runs_of[d].
std::vector<CellResult> cross_validate(const ExperimentConfig& config,
                                       const std::vector<Dataset>& datasets,
                                       const std::vector<std::string>& seed_names,
                                       const std::vector<std::size_t>& runs_of,
                                       std::size_t max_members,
                                       const std::vector<std::size_t>& eval_sizes,
                                       const ExecutionOptions& options) {
  std::vector<NetworkConfig> networks;
  for (const auto& d : datasets) networks.push_back(resolve_network_config(config, d));

  std::vector<FoldJob> jobs;
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    if (datasets[d].size() < config.cv_folds) {
      throw ConfigError("dataset " + datasets[d].name() + " has fewer examples than cv_folds");
    }
    for (const auto& [learner, method] : method_grid(config)) {
      for (std::size_t f = 0; f < config.cv_folds; ++f) {
        jobs.push_back({d, learner, method, runs_of[d], f});
      }
    }
  }

  std::vector<std::vector<CellResult>> out(jobs.size());
  parallel_for(jobs.size(), options, [&](std::size_t j) {
    const FoldJob& job = jobs[j];
    const Dataset& data = datasets[job.dataset];
    const std::string& name = seed_names[job.dataset];
    const FoldPlan plan = make_folds(data.size(), config.cv_folds,
                                     fold_seed(config.master_seed, name, job.learner, job.method,
                                               job.run));
    const bool single = job.method == Method::single;
    const std::vector<std::size_t> sizes = single ? std::vector<std::size_t>{1} : eval_sizes;
    const auto learner = make_learner(job.learner, networks[job.dataset]);
    const auto wrong = evaluate_fold(
        data, plan, job.fold, *learner, job.method, single ? 1 : max_members,
        ensemble_seed(config.master_seed, name, job.learner, job.method, job.run, job.fold), sizes);
    const std::size_t tested = plan.test_rows(job.fold).size();
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      out[j].push_back(CellResult{data.name(), job.learner, job.method, sizes[i], job.run, job.fold,
                                  wrong[i], tested});
    }
  });

  std::vector<CellResult> cells;
  for (auto& part : out) cells.insert(cells.end(), part.begin(), part.end());
  std::sort(cells.begin(), cells.end(), cell_less);
  return cells;
}

std::vector<CellResult> repeated_cv(const ExperimentConfig& config,
                                    const std::vector<Dataset>& datasets, std::size_t max_members,
                                    const std::vector<std::size_t>& eval_sizes,
                                    const ExecutionOptions& options) {
  // One cross_validate call per run keeps job construction simple; runs are
  // concatenated and re-sorted.
  std::vector<std::string> names;
  for (const auto& d : datasets) names.push_back(d.name());
  std::vector<CellResult> all;
  for (std::size_t run = 0; run < config.cv_runs; ++run) {
    auto cells = cross_validate(config, datasets, names, std::vector<std::size_t>(datasets.size(), run),
                                max_members, eval_sizes, options);
    all.insert(all.end(), cells.begin(), cells.end());
  }
  std::sort(all.begin(), all.end(), cell_less);
  return all;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double population_sd(const std::vector<double>& v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

using GroupKey = std::tuple<std::string, LearnerKind, Method, std::size_t>;

// Per-run errors (fractions) for each (dataset, learner, method, members).
std::map<GroupKey, std::vector<double>> run_errors(const std::vector<CellResult>& cells) {
  struct Tally {
    std::size_t wrong = 0;
    std::size_t tested = 0;
    std::set<std::size_t> folds;
  };
  std::map<GroupKey, std::map<std::size_t, Tally>> tallies;
  for (const auto& c : cells) {
    if (c.tested == 0) throw std::invalid_argument("cell with no tested examples");
    auto& t = tallies[{c.dataset, c.learner, c.method, c.members}][c.run];
    if (!t.folds.insert(c.fold).second) {
      throw std::invalid_argument("duplicate fold " + std::to_string(c.fold) + " in run " +
                                  std::to_string(c.run) + " of " + c.dataset);
    }
    t.wrong += c.misclassified;
    t.tested += c.tested;
  }
  std::map<GroupKey, std::vector<double>> errors;
  for (const auto& [key, runs] : tallies) {
    for (const auto& [run, t] : runs) {
      if (*t.folds.rbegin() + 1 != t.folds.size()) {
        throw std::invalid_argument("run " + std::to_string(run) + " of " + std::get<0>(key) +
                                    " is missing folds");
      }
      errors[key].push_back(static_cast<double>(t.wrong) / static_cast<double>(t.tested));
    }
  }
  return errors;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (members < 1) throw ConfigError("members must be ≥ 1");
  if (cv_runs < 1) throw ConfigError("cv_runs must be ≥ 1");
  if (cv_folds < 2) throw ConfigError("cv_folds must be ≥ 2");
  if (learners.empty()) throw ConfigError("no learners configured");
  if (methods.empty()) throw ConfigError("no methods configured");
  if (contains(methods, Method::simple) && !contains(learners, LearnerKind::network)) {
    throw ConfigError("simple requires network learner");
  }
  std::set<std::string> names;
  for (const auto& d : datasets) {
    if (!names.insert(d.name).second) throw ConfigError("duplicate dataset " + d.name);
  }
  for (const auto& [name, net] : network_overrides) {
    try {
      net.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("network." + name + ": " + e.what());
    }
  }
}

void parallel_for(std::size_t n, const ExecutionOptions& options,
                  const std::function<void(std::size_t)>& fn) {
  std::size_t threads = options.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

bool cell_less(const CellResult& a, const CellResult& b) {
  return std::tie(a.dataset, a.learner, a.method, a.members, a.run, a.fold) <
         std::tie(b.dataset, b.learner, b.method, b.members, b.run, b.fold);
}

double error_rate(std::span<const std::size_t> predictions, std::span<const std::size_t> labels) {
  if (predictions.size() != labels.size()) {
    throw std::invalid_argument("prediction and label counts differ");
  }
  if (predictions.empty()) throw std::invalid_argument("no predictions");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) wrong += predictions[i] != labels[i];
  return static_cast<double>(wrong) / static_cast<double>(labels.size());
}

NetworkConfig resolve_network_config(const ExperimentConfig& config, const Dataset& data) {
  if (auto it = config.network_overrides.find(data.name()); it != config.network_overrides.end()) {
    return it->second;
  }
  return lookup_network_config(data.name(), encoded_input_width(data.schema()),
                               encoded_target_width(data.schema()), data.size());
}

std::uint64_t fold_seed(std::uint64_t master, std::string_view dataset, LearnerKind learner,
                        Method method, std::size_t run) {
  return derive_seed(master, {label_hash(dataset), static_cast<std::uint64_t>(learner),
                              static_cast<std::uint64_t>(method), static_cast<std::uint64_t>(run),
                              purpose::folds});
}

std::uint64_t ensemble_seed(std::uint64_t master, std::string_view dataset, LearnerKind learner,
                            Method method, std::size_t run, std::size_t fold) {
  return derive_seed(master, {label_hash(dataset), static_cast<std::uint64_t>(learner),
                              static_cast<std::uint64_t>(method), static_cast<std::uint64_t>(run),
                              static_cast<std::uint64_t>(fold), purpose::ensemble});
}

std::vector<Dataset> load_datasets(const ExperimentConfig& config) {
  std::vector<Dataset> out;
  for (const auto& spec : config.datasets) {
    try {
      Dataset d = load_dataset(spec.csv, spec.schema);
      out.emplace_back(spec.name, d.shared_schema(), d.examples(), d.imputed_counts());
    } catch (const std::exception& e) {
      throw ConfigError("dataset " + spec.name + ": " + e.what());
    }
  }
  return out;
}

std::vector<std::pair<LearnerKind, Method>> method_grid(const ExperimentConfig& config) {
  std::vector<std::pair<LearnerKind, Method>> grid;
  for (LearnerKind learner : config.learners) {
    for (Method method : config.methods) {
      if (method == Method::simple && learner != LearnerKind::network) continue;
      grid.emplace_back(learner, method);
    }
  }
  return grid;
}

std::vector<CellResult> run_cv(const ExperimentConfig& config, const ExecutionOptions& options) {
  config.validate();
  return run_cv(config, load_datasets(config), options);
}

std::vector<CellResult> run_cv(const ExperimentConfig& config, const std::vector<Dataset>& datasets,
                               const ExecutionOptions& options) {
  config.validate();
  return repeated_cv(config, datasets, config.members, {config.members}, options);
}

ExperimentReport aggregate(const std::vector<CellResult>& cells, bool require_baseline) {
  const auto errors = run_errors(cells);
  std::map<std::tuple<std::string, LearnerKind, Method>, std::size_t> seen;
  for (const auto& [key, runs] : errors) {
    const auto short_key = std::make_tuple(std::get<0>(key), std::get<1>(key), std::get<2>(key));
    if (++seen[short_key] > 1) {
      throw std::invalid_argument("cells for " + std::get<0>(key) + " mix ensemble sizes");
    }
  }

  ExperimentReport report;
  for (const auto& [key, runs] : errors) {
    const auto& [dataset, learner, method, members] = key;
    ReportRow row;
    row.dataset = dataset;
    row.learner = learner;
    row.method = method;
    row.runs = runs.size();
    row.error_mean = 100.0 * mean_of(runs);
    row.error_sd = 100.0 * population_sd(runs);

    auto base = errors.end();
    for (auto it = errors.begin(); it != errors.end(); ++it) {
      if (std::get<0>(it->first) == dataset && std::get<1>(it->first) == learner &&
          std::get<2>(it->first) == Method::single) {
        base = it;
      }
    }
    if (base == errors.end()) {
      if (require_baseline) {
        throw ConfigError("no single baseline for " + dataset + " " +
                          std::string(to_string(learner)));
      }
    } else {
      const double single = 100.0 * mean_of(base->second);
      row.best_single = 100.0 * *std::min_element(base->second.begin(), base->second.end());
      if (single > 0.0) {
        row.pct_reduction = 100.0 * (single - row.error_mean) / single;
        row.ratio = row.error_mean / single;
      }
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::vector<CellResult> size_sweep(const ExperimentConfig& config, std::size_t max_members,
                                   const std::vector<std::size_t>& eval_sizes,
                                   const ExecutionOptions& options) {
  config.validate();
  return size_sweep(config, load_datasets(config), max_members, eval_sizes, options);
}

std::vector<CellResult> size_sweep(const ExperimentConfig& config,
                                   const std::vector<Dataset>& datasets, std::size_t max_members,
                                   const std::vector<std::size_t>& eval_sizes,
                                   const ExecutionOptions& options) {
  config.validate();
  if (eval_sizes.empty()) throw ConfigError("no sweep sizes given");
  for (std::size_t s : eval_sizes) {
    if (s < 1 || s > max_members) {
      throw ConfigError("sweep size " + std::to_string(s) + " outside [1, max_members]");
    }
  }
  return repeated_cv(config, datasets, max_members, eval_sizes, options);
}

std::vector<SweepPoint> sweep_curves(const std::vector<CellResult>& cells) {
  const auto errors = run_errors(cells);
  std::vector<SweepPoint> points;
  std::map<std::tuple<LearnerKind, Method, std::size_t>, std::vector<double>> composite;
  for (const auto& [key, runs] : errors) {
    const auto& [dataset, learner, method, members] = key;
    const double e = 100.0 * mean_of(runs);
    points.push_back({dataset, learner, method, members, e});
    composite[{learner, method, members}].push_back(e);
  }
  for (const auto& [key, per_dataset] : composite) {
    const auto& [learner, method, members] = key;
    points.push_back({"composite", learner, method, members, mean_of(per_dataset)});
  }
  return points;
}

std::uint64_t noise_seed(std::uint64_t master, std::string_view dataset, double level,
                         std::size_t replica) {
  return derive_seed(master, {label_hash(dataset),
                              static_cast<std::uint64_t>(std::llround(level * 1e6)),
                              static_cast<std::uint64_t>(replica), purpose::noise});
}

NoiseStudyResult noise_study(const ExperimentConfig& config, const std::vector<double>& levels,
                             std::size_t replicas, const ExecutionOptions& options) {
  config.validate();
  return noise_study(config, load_datasets(config), levels, replicas, options);
}

NoiseStudyResult noise_study(const ExperimentConfig& config, const std::vector<Dataset>& datasets,
                             const std::vector<double>& levels, std::size_t replicas,
                             const ExecutionOptions& options) {
  if (replicas < 1) throw ConfigError("replicas must be ≥ 1");
  if (levels.empty()) throw ConfigError("no noise levels given");
  for (double l : levels) {
    if (!(l >= 0.0 && l <= 1.0)) throw ConfigError("noise levels must lie in [0,1]");
  }
  if (!contains(config.methods, Method::single)) {
    throw ConfigError("noise study needs the single method as its baseline");
  }
  ExperimentConfig net = config;
  net.learners = {LearnerKind::network};
  net.validate();

  NoiseStudyResult result;
  for (double level : levels) {
    std::vector<Dataset> noisy;
    std::vector<std::string> names;
    std::vector<std::size_t> runs;
    for (const auto& d : datasets) {
      for (std::size_t r = 0; r < replicas; ++r) {
        noisy.push_back(inject_noise(d, level, noise_seed(config.master_seed, d.name(), level, r)));
        names.push_back(d.name());
        runs.push_back(r);
      }
    }
    const auto cells =
        cross_validate(net, noisy, names, runs, net.members, {net.members}, options);
    for (const auto& c : cells) result.cells.push_back({level, c});

    const auto errors = run_errors(cells);
    for (const auto& d : datasets) {
      const auto single = errors.find({d.name(), LearnerKind::network, Method::single, 1});
      for (Method method : net.methods) {
        const std::size_t members = method == Method::single ? 1 : net.members;
        const auto it = errors.find({d.name(), LearnerKind::network, method, members});
        if (it == errors.end()) continue;
        const double e = 100.0 * mean_of(it->second);
        result.rows.push_back({d.name(), level, method, it->second.size(), e,
                               100.0 * mean_of(single->second) - e});
      }
    }
  }
  return result;
}

std::vector<SyntheticPoint> synthetic_study(const SyntheticOptions& options, std::uint64_t seed,
                                            const ExecutionOptions& exec) {
  if (options.datasets < 1) throw ConfigError("synthetic study needs at least one dataset");
  if (options.max_members < 1) throw ConfigError("max_members must be ≥ 1");
  if (options.ensembles_per_dataset < 1) throw ConfigError("ensembles_per_dataset must be ≥ 1");
  options.perceptron.validate();

  std::vector<OneSidedNoiseProblem> problems;
  for (std::size_t i = 0; i < options.datasets; ++i) {
    problems.push_back(gen_one_sided_noise(options.train_size, options.test_size, options.noise,
                                           derive_seed(seed, {purpose::synthetic, i})));
  }
  std::vector<std::size_t> sizes(options.max_members);
  std::iota(sizes.begin(), sizes.end(), std::size_t{1});

  struct Job {
    std::size_t problem, replicate;
    Method method;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    for (std::size_t e = 0; e < options.ensembles_per_dataset; ++e) {
      for (Method m : options.methods) jobs.push_back({i, e, m});
    }
  }
  std::vector<std::vector<double>> errors(jobs.size());
  const NetworkLearner learner(options.perceptron);
  parallel_for(jobs.size(), exec, [&](std::size_t j) {
    const Job& job = jobs[j];
    const auto& problem = problems[job.problem];
    const Ensemble ensemble = build_ensemble(
        job.method, learner, problem.train, options.max_members,
        derive_seed(seed, {purpose::ensemble, job.problem, job.replicate,
                           static_cast<std::uint64_t>(job.method)}));
    std::vector<std::size_t> wrong(sizes.size(), 0);
    for (const auto& ex : problem.test.examples()) {
      const auto labels = combine_prefixes(ensemble, ex, sizes);
      for (std::size_t s = 0; s < sizes.size(); ++s) wrong[s] += labels[s] != ex.label;
    }
    for (std::size_t w : wrong) {
      errors[j].push_back(100.0 * static_cast<double>(w) / static_cast<double>(problem.test.size()));
    }
  });

  std::vector<SyntheticPoint> points;
  const double per = static_cast<double>(options.ensembles_per_dataset);
  for (Method m : options.methods) {
    std::vector<double> overall(sizes.size(), 0.0);
    for (std::size_t i = 0; i < problems.size(); ++i) {
      std::vector<double> curve(sizes.size(), 0.0);
      for (std::size_t j = 0; j < jobs.size(); ++j) {
        if (jobs[j].problem != i || jobs[j].method != m) continue;
        for (std::size_t s = 0; s < sizes.size(); ++s) curve[s] += errors[j][s] / per;
      }
      for (std::size_t s = 0; s < sizes.size(); ++s) {
        points.push_back({"synthetic-" + std::to_string(i + 1), m, sizes[s], curve[s]});
        overall[s] += curve[s] / static_cast<double>(problems.size());
      }
    }
    for (std::size_t s = 0; s < sizes.size(); ++s) points.push_back({"mean", m, sizes[s], overall[s]});
  }
  return points;
}

double sign_test(std::size_t wins, std::size_t losses) {
  const std::size_t n = wins + losses;
  if (n == 0) throw std::invalid_argument("sign test needs at least one non-tied comparison");
  const std::size_t k = std::max(wins, losses);
  const boost::math::binomial_distribution<double> dist(static_cast<double>(n), 0.5);
  const double tail = boost::math::cdf(boost::math::complement(dist, static_cast<double>(k - 1)));
  return std::min(1.0, 2.0 * tail);
}

SignTestResult sign_test_errors(const std::vector<double>& method_errors,
                                const std::vector<double>& baseline_errors) {
  if (method_errors.size() != baseline_errors.size()) {
    throw std::invalid_argument("error vectors differ in length");
  }
  SignTestResult r;
  for (std::size_t i = 0; i < method_errors.size(); ++i) {
    if (method_errors[i] < baseline_errors[i]) {
      ++r.wins;
    } else if (method_errors[i] > baseline_errors[i]) {
      ++r.losses;
    } else {
      ++r.ties;
    }
  }
  r.p_value = sign_test(r.wins, r.losses);
  return r;
}

CorrelationMatrix correlation_matrix(const std::vector<std::string>& names,
                                     const std::vector<std::vector<double>>& vectors) {
  if (names.size() != vectors.size()) throw std::invalid_argument("one name per vector required");
  if (vectors.empty()) throw std::invalid_argument("no vectors to correlate");
  const std::size_t n = vectors.front().size();
  if (n < 3) throw std::invalid_argument("correlation needs vectors of length ≥ 3");
  std::vector<std::vector<double>> centered;
  std::vector<double> norms;
  for (std::size_t v = 0; v < vectors.size(); ++v) {
    if (vectors[v].size() != n) throw std::invalid_argument("vector " + names[v] + " has wrong length");
    const double m = mean_of(vectors[v]);
    std::vector<double> c(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      c[i] = vectors[v][i] - m;
      ss += c[i] * c[i];
    }
    if (!(ss > 0.0)) throw std::invalid_argument("zero variance in " + names[v]);
    centered.push_back(std::move(c));
    norms.push_back(std::sqrt(ss));
  }
  CorrelationMatrix out{names, std::vector<std::vector<double>>(
                                   vectors.size(), std::vector<double>(vectors.size(), 1.0))};
  for (std::size_t a = 0; a < vectors.size(); ++a) {
    for (std::size_t b = a + 1; b < vectors.size(); ++b) {
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += centered[a][i] * centered[b][i];
      const double r = std::clamp(dot / (norms[a] * norms[b]), -1.0, 1.0);
      out.values[a][b] = out.values[b][a] = r;
    }
  }
  return out;
}

}  // namespace ensbench
