#include "csnk/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "csnk/csv.hpp"
#include "csnk/first_order.hpp"
#include "csnk/rng.hpp"

namespace csnk {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr std::string_view kRunHeader =
    "iteration,epoch,batch_loss,global_loss,eta,gamma,cg_iters,termination,adjust_attempts,wall_ms";

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

double full_loss(const Objective& objective, std::span<const double> w) {
  try {
    const auto all = objective.all_rows();
    const double f = objective.loss(w, all);
    return std::isfinite(f) ? f : kNaN;
  } catch (const EvaluationError&) {
  } catch (const DomainError&) {
  }
  return kNaN;
}

RunResult run_newton(const ExperimentSpec& spec, const NetworkObjective& objective) {
  NewtonConfig cfg = spec.newton;
  cfg.step_rule = spec.optimizer == OptimizerKind::NewtonBacktrack ? StepRule::Backtracking : StepRule::TaylorRatio;
  const std::size_t n = objective.sample_count();

  RunResult result;
  NewtonState state = make_newton_state(objective, objective.model().init_params(spec.seed));
  result.epoch_losses.push_back(state.global_loss);
  std::size_t iteration = 0;
  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    auto batches = make_batches(n, spec.batch_size, spec.seed, epoch);
    if (spec.max_iterations > 0) {
      if (iteration >= spec.max_iterations) break;
      batches.resize(std::min(batches.size(), spec.max_iterations - iteration));
    }
    const auto outcomes = newton_epoch(state, objective, batches, cfg);
    for (const auto& o : outcomes) {
      RunRecord r;
      r.iteration = ++iteration;
      r.epoch = epoch + 1;
      r.batch_loss = o.batch_loss;
      r.global_loss = o.global_loss;
      r.eta = o.eta;
      r.gamma = o.gamma;
      r.cg_iters = o.cg_iters;
      r.termination = termination_name(o.termination);
      r.adjust_attempts = o.adjust_attempts;
      r.wall_ms = spec.record_timing ? o.wall_ms : 0.0;
      result.records.push_back(std::move(r));
    }
    const double loss = state.diverged ? kNaN : full_loss(objective, state.w);
    result.epoch_losses.push_back(loss);
    if (!std::isfinite(loss)) {
      result.diverged = true;
      break;
    }
  }
  result.params = std::move(state.w);
  return result;
}

RunResult run_first_order(const ExperimentSpec& spec, const NetworkObjective& objective) {
  const std::size_t n = objective.sample_count();
  std::vector<double> w = objective.model().init_params(spec.seed);
  std::vector<double> g(w.size());
  AdamState adam(w.size());
  AdamConfig adam_cfg;
  adam_cfg.lr = spec.lr;

  RunResult result;
  result.epoch_losses.push_back(full_loss(objective, w));
  std::size_t iteration = 0;
  for (int epoch = 0; epoch < spec.epochs && !result.diverged; ++epoch) {
    auto batches = make_batches(n, spec.batch_size, spec.seed, epoch);
    if (spec.max_iterations > 0) {
      if (iteration >= spec.max_iterations) break;
      batches.resize(std::min(batches.size(), spec.max_iterations - iteration));
    }
    for (const auto& rows : batches) {
      const auto start = std::chrono::steady_clock::now();
      RunRecord r;
      r.iteration = ++iteration;
      r.epoch = epoch + 1;
      r.gamma = spec.lr;
      r.termination = "none";
      try {
        r.batch_loss = objective.loss_and_gradient(w, rows, g);
      } catch (const EvaluationError&) {
        r.batch_loss = kNaN;
      } catch (const DomainError&) {
        r.batch_loss = kNaN;
      }
      if (!std::isfinite(r.batch_loss)) {
        result.diverged = true;
        result.records.push_back(std::move(r));
        break;
      }
      if (spec.optimizer == OptimizerKind::Sgd)
        sgd_step(w, g, spec.lr);
      else
        adam_step(adam, w, g, adam_cfg);
      if (spec.record_timing)
        r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      result.records.push_back(std::move(r));
    }
    const double loss = result.diverged ? kNaN : full_loss(objective, w);
    result.epoch_losses.push_back(loss);
    if (!result.records.empty()) result.records.back().global_loss = loss;
    if (!std::isfinite(loss)) result.diverged = true;
  }
  result.params = std::move(w);
  return result;
}

double average_attempts_epoch1(const RunResult& run) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& r : run.records) {
    if (r.epoch != 1 || r.termination == termination_name(Termination::BatchSkipped)) continue;
    total += r.adjust_attempts;
    ++count;
  }
  return count == 0 ? 0.0 : total / static_cast<double>(count);
}

}  // namespace

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::LogReg:
      return "logreg";
    case ModelKind::SvmHinge2:
      return "svm";
    case ModelKind::MlpClassifier:
      return "mlp";
    case ModelKind::MlpAutoencoder:
      return "autoencoder";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view name) {
  for (const ModelKind k : {ModelKind::LogReg, ModelKind::SvmHinge2, ModelKind::MlpClassifier, ModelKind::MlpAutoencoder})
    if (model_kind_name(k) == name) return k;
  throw std::invalid_argument("unknown model '" + std::string(name) + "'");
}

std::string_view optimizer_name(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::NewtonCg:
      return "newton_cg";
    case OptimizerKind::NewtonBacktrack:
      return "newton_backtrack";
    case OptimizerKind::Sgd:
      return "sgd";
    case OptimizerKind::Adam:
      return "adam";
  }
  return "?";
}

OptimizerKind parse_optimizer(std::string_view name) {
  for (const OptimizerKind k :
       {OptimizerKind::NewtonCg, OptimizerKind::NewtonBacktrack, OptimizerKind::Sgd, OptimizerKind::Adam})
    if (optimizer_name(k) == name) return k;
  throw std::invalid_argument("unknown optimizer '" + std::string(name) + "'");
}

void ExperimentSpec::validate(std::size_t n) const {
  if (batch_size < 1 || batch_size > n)
    throw std::invalid_argument("batch size must lie in [1, " + std::to_string(n) + "]");
  if (epochs < 1) throw std::invalid_argument("epochs must be positive");
  if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (model == ModelKind::MlpAutoencoder && hidden.empty())
    throw std::invalid_argument("autoencoder needs at least one encoder width");
  newton.validate();
}

void write_run_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  out << kRunHeader << '\n';
  for (const auto& r : records) {
    out << r.iteration << ',' << r.epoch << ',' << csv::format_double(r.batch_loss) << ','
        << (r.global_loss ? csv::format_double(*r.global_loss) : std::string()) << ',' << csv::format_double(r.eta)
        << ',' << csv::format_double(r.gamma) << ',' << r.cg_iters << ',' << r.termination << ','
        << r.adjust_attempts << ',' << csv::format_double(r.wall_ms) << '\n';
  }
}

std::vector<RunRecord> parse_run_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kRunHeader) throw ParseError("run CSV: missing or unexpected header");
  std::vector<RunRecord> records;
  std::size_t line_no = 1;
  auto parse_int = [&](std::string_view s) {
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
      throw ParseError("run CSV: line " + std::to_string(line_no) + ": malformed integer '" + std::string(s) + "'");
    return v;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = csv::split_line(line);
    if (f.size() != 10) throw ParseError("run CSV: line " + std::to_string(line_no) + ": expected 10 fields");
    RunRecord r;
    r.iteration = static_cast<std::size_t>(parse_int(f[0]));
    r.epoch = static_cast<int>(parse_int(f[1]));
    r.batch_loss = csv::parse_double(f[2]);
    if (!f[3].empty()) r.global_loss = csv::parse_double(f[3]);
    r.eta = csv::parse_double(f[4]);
    r.gamma = csv::parse_double(f[5]);
    r.cg_iters = static_cast<int>(parse_int(f[6]));
    r.termination = std::string(f[7]);
    r.adjust_attempts = static_cast<int>(parse_int(f[8]));
    r.wall_ms = csv::parse_double(f[9]);
    records.push_back(std::move(r));
  }
  return records;
}

LossKind loss_for(ModelKind kind) {
  switch (kind) {
    case ModelKind::LogReg:
    case ModelKind::MlpClassifier:
      return LossKind::CrossEntropySoftmax;
    case ModelKind::SvmHinge2:
      return LossKind::Hinge2;
    case ModelKind::MlpAutoencoder:
      return LossKind::MSE;
  }
  return LossKind::CrossEntropySoftmax;
}

Model build_model(const ExperimentSpec& spec, const Dataset& data) {
  const std::size_t d = data.d();
  const auto classes = static_cast<std::size_t>(std::max(data.classes, 2));
  switch (spec.model) {
    case ModelKind::LogReg:
    case ModelKind::SvmHinge2:
      return Model({DenseLayer{d, classes, true}});
    case ModelKind::MlpClassifier: {
      std::vector<std::size_t> widths{d};
      widths.insert(widths.end(), spec.hidden.begin(), spec.hidden.end());
      widths.push_back(classes);
      return Model::mlp(widths, spec.activation);
    }
    case ModelKind::MlpAutoencoder: {
      std::vector<std::size_t> widths{d};
      widths.insert(widths.end(), spec.hidden.begin(), spec.hidden.end());
      for (std::size_t k = spec.hidden.size() - 1; k-- > 0;) widths.push_back(spec.hidden[k]);
      widths.push_back(d);
      return Model::mlp(widths, spec.activation, spec.activation);
    }
  }
  throw std::logic_error("unknown model kind");
}

NetworkObjective build_objective(const ExperimentSpec& spec, const Dataset& data) {
  Batch samples = spec.model == ModelKind::MlpAutoencoder ? to_autoencoder_batch(data) : to_batch(data);
  return NetworkObjective(build_model(spec, data), loss_for(spec.model), std::move(samples));
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                                                   int epoch) {
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (batch_size < n) {
    Rng rng(mix_seed(seed, 0xe90c0000ull + static_cast<std::uint64_t>(epoch)));
    rng.shuffle(order);
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += batch_size)
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(n, start + batch_size)));
  return batches;
}

RunResult run_experiment(const ExperimentSpec& spec, const Dataset& data, const std::optional<std::string>& out_path) {
  spec.validate(data.n());
  const NetworkObjective objective = build_objective(spec, data);
  RunResult result = spec.optimizer == OptimizerKind::NewtonCg || spec.optimizer == OptimizerKind::NewtonBacktrack
                         ? run_newton(spec, objective)
                         : run_first_order(spec, objective);
  if (out_path) {
    auto out = open_output(*out_path);
    write_run_csv(out, result.records);
  }
  return result;
}

std::vector<ErrorRow> run_csfd_study(const std::optional<std::string>& out_path) {
  const double x = 10.0;
  const double q = x * x + 1.0;
  // f = e^x u with u = 1/(x^2+1).
  const double u = 1.0 / q;
  const double du = -2.0 * x / (q * q);
  const double d2u = (6.0 * x * x - 2.0) / (q * q * q);
  const ExactDerivatives exact{std::exp(x) * (u + du), std::exp(x) * (u + 2.0 * du + d2u)};
  auto f = [](auto v) { return exp(v) / (v * v + 1.0); };
  auto rows = error_curve(f, exact, x, log_grid(0, -30));
  if (out_path) {
    auto out = open_output(*out_path);
    write_error_curve_csv(out, rows);
  }
  return rows;
}

std::vector<TrainingCurve> run_ffd_training_study(const ExperimentSpec& spec, const Dataset& data,
                                                  const std::vector<double>& h_list, std::size_t iterations,
                                                  const std::optional<std::string>& out_path) {
  std::vector<TrainingCurve> curves;
  ExperimentSpec base = spec;
  base.optimizer = OptimizerKind::NewtonCg;
  base.max_iterations = iterations;
  for (const double h : h_list) {
    ExperimentSpec s = base;
    s.newton.scheme = DirectionalScheme::ForwardDifference;
    s.newton.ffd_h = h;
    curves.push_back({"ffd", h, run_experiment(s, data)});
  }
  ExperimentSpec reference = base;
  reference.newton.scheme = DirectionalScheme::ComplexStep;
  curves.push_back({"csfd", reference.newton.h1, run_experiment(reference, data)});

  if (out_path) {
    auto out = open_output(*out_path);
    out << "method,h,iteration,batch_loss,global_loss\n";
    for (const auto& c : curves)
      for (const auto& r : c.run.records) {
        out << c.method << ',' << csv::format_double(c.h) << ',' << r.iteration << ','
            << csv::format_double(r.batch_loss) << ',';
        if (r.global_loss) out << csv::format_double(*r.global_loss);
        out << '\n';
      }
  }
  return curves;
}

std::vector<AblationRun> run_ablations(const ExperimentSpec& spec, const Dataset& data, const AblationAxes& axes,
                                       const std::optional<std::string>& out_dir) {
  std::vector<AblationRun> runs;
  ExperimentSpec base = spec;
  base.optimizer = OptimizerKind::NewtonCg;
  auto add = [&](const std::string& axis, const std::string& variant, const ExperimentSpec& s) {
    AblationRun run;
    run.axis = axis;
    run.variant = variant;
    run.run = run_experiment(s, data);
    run.final_loss = run.run.final_loss();
    run.avg_attempts_epoch1 = average_attempts_epoch1(run.run);
    runs.push_back(std::move(run));
  };

  for (const double eta : axes.eta_tilde) {
    ExperimentSpec s = base;
    s.newton.eta_tilde = eta;
    add("eta_tilde", csv::format_double(eta), s);
  }
  if (axes.early_termination) {
    for (const bool on : {true, false}) {
      ExperimentSpec s = base;
      s.newton.early_termination = on;
      add("early_termination", on ? "on" : "off", s);
    }
  }
  for (const std::size_t bs : axes.batch_sizes) {
    ExperimentSpec s = base;
    s.batch_size = std::min(bs, data.n());
    add("batch_size", std::to_string(s.batch_size), s);
  }
  for (const Activation fn : axes.activations) {
    for (const OptimizerKind opt : {OptimizerKind::NewtonCg, OptimizerKind::Adam}) {
      ExperimentSpec s = base;
      s.activation = fn;
      s.optimizer = opt;
      add("activation", std::string(optimizer_name(opt)) + "/" + std::string(activation_name(fn)), s);
    }
  }
  if (axes.step_rule) {
    for (const OptimizerKind opt : {OptimizerKind::NewtonCg, OptimizerKind::NewtonBacktrack}) {
      ExperimentSpec s = base;
      s.optimizer = opt;
      add("step_rule", opt == OptimizerKind::NewtonCg ? "taylor_ratio" : "backtracking", s);
    }
  }

  if (out_dir) {
    std::vector<std::string> axis_names;
    for (const auto& r : runs)
      if (std::find(axis_names.begin(), axis_names.end(), r.axis) == axis_names.end()) axis_names.push_back(r.axis);
    for (const auto& axis : axis_names) {
      auto out = open_output(*out_dir + "/ablation_" + axis + ".csv");
      out << "variant,iteration,epoch,batch_loss,global_loss\n";
      for (const auto& r : runs) {
        if (r.axis != axis) continue;
        for (const auto& rec : r.run.records)
          out << r.variant << ',' << rec.iteration << ',' << rec.epoch << ',' << csv::format_double(rec.batch_loss)
              << ',' << (rec.global_loss ? csv::format_double(*rec.global_loss) : std::string()) << '\n';
      }
    }
    auto summary = open_output(*out_dir + "/ablation_summary.csv");
    summary << "axis,variant,final_loss,avg_attempts_epoch1\n";
    for (const auto& r : runs)
      summary << r.axis << ',' << r.variant << ',' << csv::format_double(r.final_loss) << ','
              << csv::format_double(r.avg_attempts_epoch1) << '\n';
  }
  return runs;
}

std::string bundled_digits_images() { return std::string(CSNK_DATA_DIR) + "/digits8x8-images-idx3-ubyte"; }
std::string bundled_digits_labels() { return std::string(CSNK_DATA_DIR) + "/digits8x8-labels-idx1-ubyte"; }

}  // namespace csnk
