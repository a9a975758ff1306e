// Command-line driver for the experiments. Exit codes: 0 success, 1 usage
// error, 2 data or parse error, 3 numeric failure.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "csnk/dataset.hpp"
#include "csnk/errors.hpp"
#include "csnk/experiment.hpp"

namespace {

struct DataOptions {
  std::string dataset = "digits";
  std::size_t downsample = 0;
  std::size_t limit = 0;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return parts;
}

// digits | blobs[:N,D,C] | libsvm:PATH | idx:IMAGES,LABELS
csnk::Dataset load_dataset(const DataOptions& opt, std::uint64_t seed) {
  const auto colon = opt.dataset.find(':');
  const std::string kind = opt.dataset.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : opt.dataset.substr(colon + 1);
  csnk::Dataset data;
  if (kind == "digits") {
    data = csnk::load_idx(csnk::bundled_digits_images(), csnk::bundled_digits_labels());
  } else if (kind == "blobs") {
    std::size_t n = 500, d = 20;
    int classes = 2;
    if (!arg.empty()) {
      const auto p = split(arg, ',');
      if (p.size() != 3) throw std::invalid_argument("blobs expects N,D,C");
      n = std::stoul(p[0]);
      d = std::stoul(p[1]);
      classes = std::stoi(p[2]);
    }
    data = csnk::make_blobs(n, d, classes, 1.0, seed);
  } else if (kind == "libsvm") {
    data = csnk::load_libsvm(arg);
  } else if (kind == "idx") {
    const auto p = split(arg, ',');
    if (p.size() != 2) throw std::invalid_argument("idx expects IMAGES,LABELS");
    data = csnk::load_idx(p[0], p[1]);
  } else {
    throw std::invalid_argument("unknown dataset '" + opt.dataset + "'");
  }
  if (opt.downsample > 0) {
    const auto side = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(data.d()))));
    data = csnk::downsample_images(data, side, opt.downsample);
  }
  if (opt.limit > 0) data = csnk::take(data, opt.limit);
  return data;
}

struct TrainOptions {
  std::string model = "logreg";
  std::string optimizer = "newton_cg";
  std::string activation = "sigmoid";
  std::vector<std::size_t> hidden;
  double lr = 1e-2;
  std::size_t batch_size = 128;
  int epochs = 10;
  std::uint64_t seed = 1;
  double eta_tilde = 0.05;
  bool no_warm_start = false;
  bool no_early_termination = false;
  int grad_refresh_every = 1;
  bool timing = false;
};

void add_train_flags(CLI::App* cmd, TrainOptions& t, DataOptions& d) {
  cmd->add_option("--dataset", d.dataset, "digits | blobs[:N,D,C] | libsvm:PATH | idx:IMAGES,LABELS");
  cmd->add_option("--downsample", d.downsample, "Downsample square images to this side length");
  cmd->add_option("--limit", d.limit, "Use only the first N samples");
  cmd->add_option("--model", t.model, "logreg | svm | mlp | autoencoder");
  cmd->add_option("--optimizer", t.optimizer, "newton_cg | newton_backtrack | sgd | adam");
  cmd->add_option("--activation", t.activation, "none | sigmoid | tanh | relu | elu | sin");
  cmd->add_option("--hidden", t.hidden, "Hidden widths (MLP) or encoder widths (autoencoder)")->delimiter(',');
  cmd->add_option("--lr", t.lr, "Learning rate for sgd / adam");
  cmd->add_option("--batch-size", t.batch_size);
  cmd->add_option("--epochs", t.epochs);
  cmd->add_option("--seed", t.seed);
  cmd->add_option("--eta-tilde", t.eta_tilde, "Taylor-ratio target");
  cmd->add_flag("--no-warm-start", t.no_warm_start);
  cmd->add_flag("--no-early-termination", t.no_early_termination);
  cmd->add_option("--grad-refresh-every", t.grad_refresh_every, "Refresh the global gradient every K accepted steps");
  cmd->add_flag("--timing", t.timing, "Record wall-clock times (output is then not reproducible)");
}

csnk::ExperimentSpec make_spec(const TrainOptions& t, std::size_t n) {
  csnk::ExperimentSpec spec;
  spec.model = csnk::parse_model_kind(t.model);
  spec.optimizer = csnk::parse_optimizer(t.optimizer);
  spec.activation = csnk::parse_activation(t.activation);
  spec.hidden = t.hidden;
  if (spec.model == csnk::ModelKind::MlpClassifier && spec.hidden.empty()) spec.hidden = {32, 16};
  if (spec.model == csnk::ModelKind::MlpAutoencoder && spec.hidden.empty()) spec.hidden = {32, 16, 8};
  spec.lr = t.lr;
  spec.batch_size = std::min(t.batch_size, n);
  spec.epochs = t.epochs;
  spec.seed = t.seed;
  spec.newton.eta_tilde = t.eta_tilde;
  spec.newton.warm_start = !t.no_warm_start;
  spec.newton.early_termination = !t.no_early_termination;
  spec.newton.grad_refresh_every = t.grad_refresh_every;
  spec.record_timing = t.timing;
  spec.validate(n);
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Complex-step Newton-Krylov training experiments"};
  app.require_subcommand(1);

  std::string out;
  TrainOptions train;
  DataOptions data_opt;
  std::vector<double> h_list{1e-2, 1e-4, 1e-6, 1e-8, 1e-16};
  std::size_t iterations = 100;

  auto* csfd = app.add_subcommand("csfd-study", "Derivative error curves for e^x/(x^2+1) at x = 10");
  csfd->add_option("--out", out, "Output CSV (stdout when omitted)");

  auto* train_cmd = app.add_subcommand("train", "Train one model and write per-iteration records");
  train_cmd->add_option("--out", out, "Output CSV (stdout when omitted)");
  add_train_flags(train_cmd, train, data_opt);

  auto* ffd = app.add_subcommand("ffd-study", "Newton-CG with forward-difference curvature for several h");
  ffd->add_option("--out", out, "Output CSV (stdout when omitted)");
  ffd->add_option("--h-list", h_list, "Perturbation sizes")->delimiter(',');
  ffd->add_option("--iterations", iterations);
  add_train_flags(ffd, train, data_opt);

  auto* ablate = app.add_subcommand("ablate", "Optimizer ablations; writes one CSV per axis");
  ablate->add_option("--out", out, "Output directory")->required();
  add_train_flags(ablate, train, data_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (csfd->parsed()) {
      const auto rows = csnk::run_csfd_study(out.empty() ? std::nullopt : std::optional<std::string>(out));
      if (out.empty()) csnk::write_error_curve_csv(std::cout, rows);
      return 0;
    }

    const csnk::Dataset data = load_dataset(data_opt, train.seed);
    const csnk::ExperimentSpec spec = make_spec(train, data.n());

    if (train_cmd->parsed()) {
      const auto result = csnk::run_experiment(spec, data, out.empty() ? std::nullopt : std::optional<std::string>(out));
      if (out.empty()) csnk::write_run_csv(std::cout, result.records);
      std::cerr << "final loss " << result.final_loss() << (result.diverged ? " (diverged)" : "") << '\n';
      return 0;
    }
    if (ffd->parsed()) {
      const std::string path = out.empty() ? "/dev/stdout" : out;
      for (const auto& c : csnk::run_ffd_training_study(spec, data, h_list, iterations, path))
        std::cerr << c.method << " h=" << c.h << " final loss " << c.run.final_loss() << '\n';
      return 0;
    }
    if (ablate->parsed()) {
      std::filesystem::create_directories(out);
      for (const auto& r : csnk::run_ablations(spec, data, csnk::AblationAxes{}, out))
        std::cerr << r.axis << ' ' << r.variant << " final loss " << r.final_loss << " avg attempts "
                  << r.avg_attempts_epoch1 << '\n';
      return 0;
    }
  } catch (const csnk::ParseError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const csnk::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 3;
  } catch (const csnk::EvaluationError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 3;
  } catch (const csnk::DomainError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
