#pragma once

// Experiment drivers: training runs with per-iteration records, the
// derivative error study, the finite-difference training study and the
// optimizer ablations. All output is CSV.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "csnk/csfd.hpp"
#include "csnk/dataset.hpp"
#include "csnk/network.hpp"
#include "csnk/newton_krylov.hpp"
#include "csnk/objective.hpp"

namespace csnk {

enum class ModelKind { LogReg, SvmHinge2, MlpClassifier, MlpAutoencoder };
enum class OptimizerKind { NewtonCg, NewtonBacktrack, Sgd, Adam };

std::string_view model_kind_name(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);
std::string_view optimizer_name(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view name);

struct ExperimentSpec {
  ModelKind model = ModelKind::LogReg;
  /// Hidden widths for the MLP classifier; encoder widths after the input for
  /// the autoencoder (the decoder mirrors them).
  std::vector<std::size_t> hidden;
  Activation activation = Activation::Sigmoid;
  OptimizerKind optimizer = OptimizerKind::NewtonCg;
  double lr = 1e-2;  // SGD / Adam
  std::size_t batch_size = 128;
  int epochs = 10;
  std::uint64_t seed = 1;
  NewtonConfig newton;
  /// Stop after this many optimizer iterations (0 = no limit).
  std::size_t max_iterations = 0;
  /// Write measured wall-clock times instead of 0 (breaks byte-identical output).
  bool record_timing = false;

  void validate(std::size_t n) const;
};

struct RunRecord {
  std::size_t iteration = 0;
  int epoch = 0;
  double batch_loss = 0.0;
  std::optional<double> global_loss;
  double eta = 0.0;
  double gamma = 0.0;
  int cg_iters = 0;
  std::string termination;
  int adjust_attempts = 0;
  double wall_ms = 0.0;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

void write_run_csv(std::ostream& out, const std::vector<RunRecord>& records);
std::vector<RunRecord> parse_run_csv(std::istream& in);

struct RunResult {
  std::vector<RunRecord> records;
  /// Full-data loss at initialization and after each epoch.
  std::vector<double> epoch_losses;
  std::vector<double> params;
  bool diverged = false;

  double final_loss() const { return epoch_losses.empty() ? 0.0 : epoch_losses.back(); }
};

Model build_model(const ExperimentSpec& spec, const Dataset& data);
LossKind loss_for(ModelKind kind);
NetworkObjective build_objective(const ExperimentSpec& spec, const Dataset& data);

/// Row partition for one epoch: a seeded shuffle cut into batch_size chunks
/// (the last chunk may be short). A full batch keeps the natural order.
std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                                                   int epoch);

/// Trains per spec. Writes the record CSV to out_path when given.
RunResult run_experiment(const ExperimentSpec& spec, const Dataset& data,
                         const std::optional<std::string>& out_path = std::nullopt);

/// Error curve of f(x) = e^x / (x^2 + 1) at x = 10 over h = 1e0 ... 1e-30.
std::vector<ErrorRow> run_csfd_study(const std::optional<std::string>& out_path = std::nullopt);

struct TrainingCurve {
  std::string method;  // "ffd" or "csfd"
  double h = 0.0;
  RunResult run;
};

/// Newton-CG with forward-difference directional derivatives for each h,
/// plus the complex-step reference, limited to `iterations` iterations.
/// CSV columns: method,h,iteration,batch_loss,global_loss (empty when not refreshed).
std::vector<TrainingCurve> run_ffd_training_study(const ExperimentSpec& spec, const Dataset& data,
                                                  const std::vector<double>& h_list, std::size_t iterations = 100,
                                                  const std::optional<std::string>& out_path = std::nullopt);

struct AblationRun {
  std::string axis;
  std::string variant;
  double final_loss = 0.0;
  /// Mean step-adjustment attempts per accepted iteration in the first epoch.
  double avg_attempts_epoch1 = 0.0;
  RunResult run;
};

struct AblationAxes {
  std::vector<double> eta_tilde = {0.001, 0.01, 0.05, 0.1, 0.2, 0.5};
  std::vector<std::size_t> batch_sizes = {32, 128, 512};
  std::vector<Activation> activations = {Activation::None, Activation::Relu, Activation::Sigmoid, Activation::Sin};
  bool early_termination = true;
  bool step_rule = true;
};

/// Runs every axis. With out_dir set, writes `ablation_<axis>.csv` curves
/// and `ablation_summary.csv` there.
std::vector<AblationRun> run_ablations(const ExperimentSpec& spec, const Dataset& data, const AblationAxes& axes,
                                       const std::optional<std::string>& out_dir = std::nullopt);

/// Path of the bundled 8x8 digits IDX files.
std::string bundled_digits_images();
std::string bundled_digits_labels();

}  // namespace csnk
