// Copyright 2026 The FEDF Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fedf/audit.hpp"
#include "fedf/runner.hpp"

namespace {

// Exit codes: 0 success, 1 validation, 2 runtime, 3 audit violation.
constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitAuditViolation = 3;

int log_level() {
  const char* env = std::getenv("FEDF_LOG");
  if (env == nullptr) return 1;
  const std::string v = env;
  if (v == "quiet") return 0;
  if (v == "debug") return 2;
  return 1;
}

void info(const std::string& line) {
  if (log_level() >= 1) std::cout << line << "\n";
}

void debug(const std::string& line) {
  if (log_level() >= 2) std::cerr << "[fedf] " << line << "\n";
}

// Accepts plain byte counts or a decimal suffix: B, KB, MB, GB (powers of
// ten, matching how model sizes are quoted).
double parse_size_bytes(const std::string& text) {
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (end == text.c_str()) {
    throw fedf::ValidationError("cannot parse size '" + text + "'");
  }
  std::string suffix(end);
  suffix.erase(std::remove_if(suffix.begin(), suffix.end(),
                              [](unsigned char c) { return std::isspace(c); }),
               suffix.end());
  std::transform(suffix.begin(), suffix.end(), suffix.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  double scale = 1.0;
  if (suffix.empty() || suffix == "B") {
    scale = 1.0;
  } else if (suffix == "K" || suffix == "KB") {
    scale = 1e3;
  } else if (suffix == "M" || suffix == "MB") {
    scale = 1e6;
  } else if (suffix == "G" || suffix == "GB") {
    scale = 1e9;
  } else {
    throw fedf::ValidationError("unknown size suffix '" + suffix + "'");
  }
  if (!(value > 0.0)) {
    throw fedf::ValidationError("size must be positive: '" + text + "'");
  }
  return value * scale;
}

std::vector<std::uint8_t> parse_hex(const std::string& hex) {
  if (hex.size() % 2 != 0) {
    throw fedf::ValidationError("--canary-hex needs an even digit count");
  }
  auto nibble = [&](char c) -> std::uint8_t {
    if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
    throw fedf::ValidationError("invalid hex digit in --canary-hex");
  };
  std::vector<std::uint8_t> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>((nibble(hex[2 * i]) << 4) |
                                       nibble(hex[2 * i + 1]));
  }
  return out;
}

std::string format_metric(const std::optional<double>& v) {
  if (!v.has_value()) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

int cmd_run(const std::string& config_path, const std::string& role,
            unsigned worker_id, const std::string& checkpoint_dir) {
  fedf::RunConfig config = fedf::load_run_config(config_path);
  if (!checkpoint_dir.empty()) {
    std::filesystem::create_directories(checkpoint_dir);
    config.master.checkpoint_dir = checkpoint_dir;
  }

  if (role == "worker") {
    debug("worker " + std::to_string(worker_id) + " connecting to " +
          config.transport.host + ":" + std::to_string(config.transport.port));
    fedf::run_worker_process(config, static_cast<fedf::WorkerId>(worker_id));
    info("worker " + std::to_string(worker_id) + " finished");
    return kExitOk;
  }

  fedf::RunOutput output;
  if (role == "master") {
    output = fedf::run_master_process(config);
  } else {
    output = fedf::execute_run(config);
  }
  const std::string dir =
      fedf::write_run_outputs(config, output, output.manifest);

  info("run directory: " + dir);
  info("epochs: " + std::to_string(output.epochs.size()) +
       ", workers: " + std::to_string(output.shard_sizes.size()));
  std::ostringstream table;
  table << "              train loss   test loss    test accuracy\n";
  auto row = [&](const char* name, const fedf::Metrics& train,
                 const std::optional<fedf::Metrics>& test) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-12s  %-11.6g  %-11s  %s", name,
                  train.loss,
                  test.has_value() ? format_metric(test->loss).c_str() : "-",
                  test.has_value() ? format_metric(test->accuracy).c_str()
                                   : "-");
    table << buf << '\n';
  };
  row("federated", output.fed_train, output.fed_test);
  if (output.central_train.has_value()) {
    row("centralized", *output.central_train, output.central_test);
  }
  info(table.str());
  if (output.accuracy_gap.has_value()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "approximation gap (accuracy): %.2f%%",
                  *output.accuracy_gap * 100.0);
    info(buf);
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "simulated speedup: %.3f",
                output.speedup_value);
  info(buf);
  return kExitOk;
}

// Decimal half-up rounding to two places, with a nudge that absorbs binary
// representation error (1.8 * 4 + 1.8 * 2 / 16 must print as 7.43, not 7.42).
double round_half_up_2dp(double v) {
  const double scaled = v * 100.0;
  return std::floor(scaled + 0.5 + 1e-9 + std::fabs(scaled) * 1e-12) / 100.0;
}

int cmd_comm(const std::string& size_text, std::size_t workers,
             std::size_t batches, unsigned width) {
  fedf::CommModel cm;
  cm.model_size_v = parse_size_bytes(size_text);
  cm.n_workers = workers;
  cm.batches_b = batches;
  cm.width_bits = width;
  const double mb = 1e6;
  char header[160];
  std::snprintf(header, sizeof header,
                "Per-epoch data exchanged (MB): V=%.2f MB, N=%zu, B=%zu, "
                "width=%u-bit",
                cm.model_size_v / mb, workers, batches, width);
  std::cout << header << "\n";
  std::cout << "  FEDF        Phong et al.  TernGrad\n";
  char rowbuf[160];
  std::snprintf(rowbuf, sizeof rowbuf, "  %-10.2f  %-12.2f  %-10.2f",
                round_half_up_2dp(fedf::comm_fedf(cm) / mb),
                round_half_up_2dp(fedf::comm_phong(cm) / mb),
                round_half_up_2dp(fedf::comm_terngrad(cm) / mb));
  std::cout << rowbuf << "\n";
  return kExitOk;
}

int cmd_audit(const std::string& transcript_path, bool as_json,
              const std::vector<std::string>& canary_hex) {
  const std::vector<fedf::TranscriptEntry> entries =
      fedf::read_transcript_jsonl(transcript_path);
  std::vector<std::vector<std::uint8_t>> canaries;
  canaries.reserve(canary_hex.size());
  for (const std::string& hex : canary_hex) canaries.push_back(parse_hex(hex));
  const fedf::AuditReport report = fedf::audit(entries, canaries);

  if (as_json) {
    std::cout << fedf::audit_report_to_json(report).dump(2) << "\n";
  } else {
    std::cout << "audit of " << transcript_path << ": " << report.epochs
              << " epochs, " << report.workers.size() << " workers\n";
    std::cout << "  inventory violations: "
              << report.inventory_violations.size() << "\n";
    for (const std::string& v : report.inventory_violations) {
      std::cout << "    - " << v << "\n";
    }
    std::cout << "  max consecutive pilot runs:";
    for (const auto& [w, n] : report.max_consecutive_pilot) {
      std::cout << " w" << w << "=" << n;
    }
    std::cout << "\n";
    if (report.full_run_monopolist.has_value()) {
      std::cout << "  FINDING: worker " << *report.full_run_monopolist
                << " was pilot in every epoch\n";
    }
    if (!report.all_zero_ternary_epochs.empty()) {
      std::cout << "  FINDING: all-zero non-pilot ternaries in "
                << report.all_zero_ternary_epochs.size() << " epoch(s):";
      for (std::uint64_t t : report.all_zero_ternary_epochs) {
        std::cout << " " << t;
      }
      std::cout << "\n";
    }
    if (!report.canary_hits.empty()) {
      std::cout << "  FINDING: " << report.canary_hits.size()
                << " canary byte leak(s)\n";
    }
    std::cout << (report.clean() ? "clean\n" : "violations found\n");
  }
  return report.clean() ? kExitOk : kExitAuditViolation;
}

int cmd_sweep(const std::string& config_path, const std::string& epochs_list,
              const std::string& out_path) {
  const fedf::RunConfig base = fedf::load_run_config(config_path);
  std::vector<std::size_t> epoch_counts;
  std::stringstream ss(epochs_list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    char* end = nullptr;
    const unsigned long v = std::strtoul(item.c_str(), &end, 10);
    if (end == item.c_str() || *end != '\0' || v == 0) {
      throw fedf::ValidationError("bad epoch count '" + item + "'");
    }
    epoch_counts.push_back(static_cast<std::size_t>(v));
  }
  if (epoch_counts.empty()) {
    throw fedf::ValidationError("--epochs-list is empty");
  }

  std::ostringstream csv;
  csv << "epochs,accuracy,speedup\n";
  for (std::size_t e : epoch_counts) {
    fedf::RunConfig config = base;
    config.master.global_epochs = e;
    fedf::RunOptions options;
    options.with_centralized = false;
    // Fig.-5-style trade-off: the speedup reference stays the base config's
    // centralized training while the federated epoch count varies.
    options.central_epochs = base.master.global_epochs;
    debug("sweep: running " + std::to_string(e) + " epochs");
    const fedf::RunOutput output = fedf::execute_run(config, options);
    const std::optional<fedf::Metrics>& test = output.fed_test;
    const std::optional<double> accuracy =
        test.has_value() ? test->accuracy : output.fed_train.accuracy;
    char buf[96];
    if (accuracy.has_value()) {
      std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f", e, *accuracy,
                    output.speedup_value);
    } else {
      std::snprintf(buf, sizeof buf, "%zu,nan,%.6f", e, output.speedup_value);
    }
    csv << buf << "\n";
  }
  if (out_path.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out(out_path);
    if (!out) {
      throw fedf::ValidationError("cannot write " + out_path);
    }
    out << csv.str();
    info("wrote " + out_path);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FEDF: synchronous federated training with goodness-based "
               "pilot selection and ternary parameter-evolution compression"};
  app.require_subcommand(1);

  // run
  std::string run_config;
  std::string role = "auto";
  unsigned worker_id = 0;
  std::string checkpoint_dir;
  CLI::App* run = app.add_subcommand(
      "run", "Execute a federated run plus a centralized baseline");
  run->add_option("--config", run_config, "Run config JSON")->required();
  run->add_option("--role", role,
                  "auto (whole run in-process), master, or worker")
      ->check(CLI::IsMember({"auto", "master", "worker"}));
  run->add_option("--id", worker_id, "Worker id (role=worker, 1-based)");
  run->add_option("--checkpoint-dir", checkpoint_dir,
                  "Write a model checkpoint after every epoch");

  // comm
  std::string comm_size;
  std::size_t comm_workers = 0;
  std::size_t comm_batches = 1;
  unsigned comm_width = 32;
  CLI::App* comm = app.add_subcommand(
      "comm", "Analytic per-epoch communication volumes (FEDF, Phong et "
              "al., TernGrad)");
  comm->add_option("--model-bytes", comm_size,
                   "Model instance size; accepts suffixes B/KB/MB/GB")
      ->required();
  comm->add_option("--workers", comm_workers, "Worker count N")->required();
  comm->add_option("--batches", comm_batches, "Mini-batches B (TernGrad)");
  comm->add_option("--width", comm_width, "Parameter width in bits")
      ->check(CLI::IsMember({32u, 64u}));

  // audit
  std::string audit_path;
  bool audit_json = false;
  std::vector<std::string> canary_hex;
  CLI::App* audit_cmd = app.add_subcommand(
      "audit", "Privacy audit of a transcript.jsonl file");
  audit_cmd->add_option("--transcript", audit_path, "Transcript JSONL path")
      ->required();
  audit_cmd->add_flag("--json", audit_json, "Machine-readable output");
  audit_cmd->add_option("--canary-hex", canary_hex,
                        "Byte pattern that must not appear in any payload "
                        "(repeatable)");

  // sweep
  std::string sweep_config;
  std::string sweep_epochs;
  std::string sweep_out;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Accuracy/speedup trade-off across epoch counts (CSV)");
  sweep->add_option("--config", sweep_config, "Run config JSON")->required();
  sweep->add_option("--epochs-list", sweep_epochs,
                    "Comma-separated global epoch counts")
      ->required();
  sweep->add_option("--out", sweep_out, "CSV output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (role == "worker" && worker_id == 0) {
        throw fedf::ValidationError("--role worker requires --id");
      }
      return cmd_run(run_config, role, worker_id, checkpoint_dir);
    }
    if (comm->parsed()) {
      return cmd_comm(comm_size, comm_workers, comm_batches, comm_width);
    }
    if (audit_cmd->parsed()) {
      return cmd_audit(audit_path, audit_json, canary_hex);
    }
    if (sweep->parsed()) {
      return cmd_sweep(sweep_config, sweep_epochs, sweep_out);
    }
  } catch (const fedf::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitValidation;
}
