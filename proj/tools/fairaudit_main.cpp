// Command-line front end: audit, merge, probe, fill, grl-demo, report,
// synth-cohort and serve-table.

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "fairaudit/audit.hpp"
#include "fairaudit/cohort.hpp"
#include "fairaudit/csv.hpp"
#include "fairaudit/error.hpp"
#include "fairaudit/grl.hpp"
#include "fairaudit/io.hpp"
#include "fairaudit/oracle.hpp"
#include "fairaudit/probe.hpp"
#include "fairaudit/report.hpp"

namespace fs = std::filesystem;
using namespace fairaudit;
using nlohmann::json;

namespace {

json read_json_file(const fs::path& path) {
  const auto text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::InvalidArgument, fmt::format("{}: {}", path.string(), e.what()));
  }
}

void report_written(const std::vector<fs::path>& paths) {
  for (const auto& p : paths) std::cerr << "wrote " << p.string() << "\n";
}

std::unique_ptr<Oracle> open_oracle(const std::string& command, const std::string& table) {
  if (!command.empty() == !table.empty()) {
    fail(ErrorCode::InvalidArgument, "give exactly one of --oracle-cmd or --oracle-table");
  }
  if (!table.empty()) return std::make_unique<TableOracle>(TableOracle::load(table));
  return std::make_unique<ProcessOracle>(command);
}

// ---------------------------------------------------------------------------
// audit

struct AuditFlags {
  std::string config, predictions, out, threshold, unit;
  std::vector<std::string> attributes, gaps, formats;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  double alpha = 0.0, level = 0.0;
  unsigned threads = 1;
  bool fdr = true;
};

void add_audit(CLI::App& app, std::function<int()>& action) {
  auto* cmd = app.add_subcommand("audit", "Bootstrap gap estimates and significance summaries");
  auto f = std::make_shared<AuditFlags>();
  cmd->add_option("--config", f->config, "JSON config file (flags override it)");
  auto* predictions = cmd->add_option("--predictions", f->predictions, "Prediction file (csv or jsonl)");
  auto* attributes = cmd->add_option("--attributes", f->attributes, "Attributes to audit")->delimiter(',');
  auto* gaps = cmd->add_option("--gaps", f->gaps, "Gap kinds: recall, parity, specificity")->delimiter(',');
  auto* b = cmd->add_option("--bootstrap-b", f->replicates, "Bootstrap replicates");
  auto* seed = cmd->add_option("--seed", f->seed, "Master seed");
  auto* alpha = cmd->add_option("--alpha", f->alpha, "FDR level");
  auto* fdr = cmd->add_flag("--fdr,!--no-fdr", f->fdr, "Benjamini-Hochberg correction");
  auto* out = cmd->add_option("--out", f->out, "Output directory");
  auto* format = cmd->add_option("--format", f->formats, "csv, markdown")->delimiter(',');
  auto* threshold = cmd->add_option("--threshold", f->threshold, "Decision threshold or 'f1'");
  auto* unit = cmd->add_option("--unit", f->unit, "Resampling unit: patient or record");
  auto* level = cmd->add_option("--level", f->level, "Confidence level");
  auto* threads = cmd->add_option("--threads", f->threads, "Bootstrap worker threads");

  cmd->callback([=, &action] {
    action = [=] {
      AuditConfig config;
      if (!f->config.empty()) config = audit_config_from_json(read_json_file(f->config));
      if (predictions->count()) config.predictions = f->predictions;
      if (attributes->count()) config.attributes = f->attributes;
      if (gaps->count()) {
        config.gap_kinds.clear();
        for (const auto& g : f->gaps) {
          try {
            config.gap_kinds.push_back(parse_gap_kind(g));
          } catch (const Error&) {
            fail(ErrorCode::InvalidArgument, fmt::format("--gaps: unknown gap kind '{}'", g));
          }
        }
      }
      if (b->count()) config.bootstrap.replicates = f->replicates;
      if (seed->count()) config.bootstrap.master_seed = f->seed;
      if (alpha->count()) config.alpha = f->alpha;
      if (fdr->count()) config.fdr = f->fdr;
      if (out->count()) config.out_dir = f->out;
      if (format->count()) config.formats = {f->formats.begin(), f->formats.end()};
      if (level->count()) config.bootstrap.level = f->level;
      if (threads->count()) config.bootstrap.threads = f->threads;
      if (unit->count()) {
        try {
          config.bootstrap.unit = parse_resample_unit(f->unit);
        } catch (const Error& e) {
          fail(ErrorCode::InvalidArgument, fmt::format("--unit: {}", e.what()));
        }
      }
      if (threshold->count()) {
        if (f->threshold == "f1") {
          config.threshold.reset();
        } else {
          try {
            config.threshold = std::stod(f->threshold);
          } catch (const std::exception&) {
            fail(ErrorCode::InvalidArgument, "--threshold: expected a number or 'f1'");
          }
        }
      }
      if (config.predictions.empty()) fail(ErrorCode::InvalidArgument, "--predictions is required");
      validate(config);

      const auto records = load_predictions(config.predictions);
      const auto result = run_audit(records, config);
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
      OutputSet outputs(config.out_dir);
      for (auto& [name, content] : render_audit(result, config)) outputs.add(name, content);
      report_written(outputs.commit());

      std::size_t flagged = 0, flagged_bh = 0;
      for (const auto& r : result.rows) {
        flagged += r.estimate.significant;
        flagged_bh += r.significant_bh.value_or(false);
      }
      std::cout << fmt::format("{} tasks, {} gap estimates, {} significant", result.tasks.size(),
                               result.rows.size(), flagged);
      if (config.fdr) std::cout << fmt::format(", {} after BH", flagged_bh);
      std::cout << "\n";
      return 0;
    };
  });
}

// ---------------------------------------------------------------------------
// merge

void add_merge(CLI::App& app, std::function<int()>& action) {
  auto* cmd = app.add_subcommand("merge", "Merge subsequence predictions into note predictions");
  auto predictions = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>("merge_out");
  auto c = std::make_shared<double>(0.0);
  auto tune = std::make_shared<bool>(false);
  auto grid = std::make_shared<std::vector<double>>(default_scaling_grid());
  cmd->add_option("--predictions", *predictions, "Subsequence-level prediction file")->required();
  auto* c_opt = cmd->add_option("--c", *c, "Fixed scaling factor");
  auto* tune_opt = cmd->add_flag("--tune", *tune, "Tune the scaling factor per task on validation notes");
  c_opt->excludes(tune_opt);
  cmd->add_option("--grid", *grid, "Candidate scaling factors for --tune")->delimiter(',');
  cmd->add_option("--out", *out, "Output directory");

  cmd->callback([=, &action] {
    action = [=] {
      if (!c_opt->count() && !*tune) fail(ErrorCode::InvalidArgument, "give --c or --tune");
      const auto format = format_from_path(*predictions);
      const auto records = load_predictions(*predictions, format);
      const auto merged = merge_notes(records, *tune ? std::nullopt : std::optional(*c), *grid);

      std::vector<std::string> comments;
      json scaling = json::object();
      for (const auto& [task, value] : merged.scaling) {
        comments.push_back(fmt::format("task={} c={}", task, value));
        scaling[task] = value;
      }
      std::ostringstream notes;
      write_predictions(notes, merged.notes, format, comments);
      OutputSet outputs(*out);
      outputs.add(format == FileFormat::Csv ? "notes.csv" : "notes.jsonl", notes.str());
      outputs.add("scaling.json", scaling.dump(2) + "\n");
      report_written(outputs.commit());
      return 0;
    };
  });
}

// ---------------------------------------------------------------------------
// probe

std::vector<fs::path> template_files(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(in)) {
        if (entry.path().extension() == ".json") found.push_back(entry.path());
      }
      std::ranges::sort(found);
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.emplace_back(in);
    }
  }
  if (files.empty()) fail(ErrorCode::InvalidArgument, "no template files given");
  return files;
}

// Notes CSV: note_id, patient_id, category, chart_order, text.
std::vector<NoteDocument> load_notes(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open notes file " + path.string());
  csv::Reader reader(in);
  const auto header = reader.next();
  const csv::Row expected{"note_id", "patient_id", "category", "chart_order", "text"};
  if (!header || *header != expected) {
    fail(ErrorCode::MalformedRow, "notes file header must be note_id,patient_id,category,chart_order,text");
  }
  std::vector<NoteDocument> notes;
  while (auto row = reader.next()) {
    if (row->size() != expected.size()) {
      fail(ErrorCode::MalformedRow, fmt::format("notes line {}: expected 5 fields", reader.line()));
    }
    NoteDocument d;
    d.note_id = (*row)[0];
    d.patient_id = (*row)[1];
    d.category = (*row)[2];
    try {
      d.chart_order = std::stoi((*row)[3]);
    } catch (const std::exception&) {
      fail(ErrorCode::MalformedRow, fmt::format("notes line {} field 'chart_order'", reader.line()));
    }
    d.text = (*row)[4];
    notes.push_back(std::move(d));
  }
  return notes;
}

// Patients CSV: patient_id, gender, topic, label.
struct TopicLabels {
  std::map<std::string, std::string> genders;
  std::map<std::string, std::map<std::string, int>> labels;  // topic -> patient -> label
};

TopicLabels load_topic_labels(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open patients file " + path.string());
  csv::Reader reader(in);
  const auto header = reader.next();
  const csv::Row expected{"patient_id", "gender", "topic", "label"};
  if (!header || *header != expected) {
    fail(ErrorCode::MalformedRow, "patients file header must be patient_id,gender,topic,label");
  }
  TopicLabels out;
  while (auto row = reader.next()) {
    if (row->size() != 4 || ((*row)[3] != "0" && (*row)[3] != "1")) {
      fail(ErrorCode::MalformedRow, fmt::format("patients line {}: bad row", reader.line()));
    }
    out.genders[(*row)[0]] = (*row)[1];
    out.labels[(*row)[2]][(*row)[0]] = (*row)[3] == "1";
  }
  return out;
}

void add_probe(CLI::App& app, std::function<int()>& action) {
  auto* cmd = app.add_subcommand("probe", "Log-probability bias scores per topic");
  struct Flags {
    std::vector<std::string> templates, formats{"csv", "markdown"};
    std::string oracle_cmd, oracle_table, mode = "literal", out = "probe_out", notes, patients;
    double alpha = 0.01;
  };
  auto f = std::make_shared<Flags>();
  cmd->add_option("--templates", f->templates, "Template files or directories")->required();
  cmd->add_option("--oracle-cmd", f->oracle_cmd, "Oracle command speaking the wire protocol");
  cmd->add_option("--oracle-table", f->oracle_table, "Table oracle JSON file");
  cmd->add_option("--mode", f->mode, "literal or both_masked_prior");
  cmd->add_option("--alpha", f->alpha, "Significance level for the signed-rank test");
  cmd->add_option("--out", f->out, "Output directory");
  cmd->add_option("--format", f->formats, "csv, markdown")->delimiter(',');
  cmd->add_option("--notes", f->notes, "Notes CSV for gender ratios");
  cmd->add_option("--patients", f->patients, "Patient labels CSV for gender ratios");

  cmd->callback([=, &action] {
    action = [=] {
      const auto mode = parse_probe_mode(f->mode);
      if (!(f->alpha > 0.0 && f->alpha < 1.0)) fail(ErrorCode::InvalidArgument, "--alpha must be in (0, 1)");
      if (f->notes.empty() != f->patients.empty()) {
        fail(ErrorCode::InvalidArgument, "--notes and --patients go together");
      }
      for (const auto& fmt_name : f->formats) {
        if (fmt_name != "csv" && fmt_name != "markdown") {
          fail(ErrorCode::InvalidArgument, "--format: unknown format '" + fmt_name + "'");
        }
      }
      std::vector<TemplateSpec> specs;
      for (const auto& path : template_files(f->templates)) specs.push_back(load_template_spec(path));
      std::optional<std::vector<NoteDocument>> notes;
      std::optional<TopicLabels> labels;
      if (!f->notes.empty()) {
        notes = load_notes(f->notes);
        labels = load_topic_labels(f->patients);
      }

      auto oracle = open_oracle(f->oracle_cmd, f->oracle_table);
      std::vector<ProbeRow> rows;
      for (const auto& spec : specs) {
        auto row = probe_topic(spec, *oracle, mode, f->alpha);
        if (labels && labels->labels.contains(spec.topic)) {
          row.gender_ratio = corpus_gender_ratio(*notes, spec.attributes, labels->genders,
                                                 labels->labels.at(spec.topic));
        }
        if (!row.comparison) {
          std::cerr << "warning: topic '" << spec.topic
                    << "': every male/female pair ties, no test run\n";
        }
        rows.push_back(std::move(row));
      }
      OutputSet outputs(f->out);
      if (std::ranges::count(f->formats, "markdown")) outputs.add("probe.md", render_probe_markdown(rows));
      if (std::ranges::count(f->formats, "csv")) outputs.add("probe.csv", render_probe_csv(rows));
      report_written(outputs.commit());
      for (const auto& r : rows) {
        const bool sig = r.comparison && r.comparison->significant;
        std::cout << fmt::format("{}: {} {}\n", r.topic, format_score_cell(r.mean_male, sig),
                                 format_score_cell(r.mean_female, sig));
      }
      return 0;
    };
  });
}

// ---------------------------------------------------------------------------
// fill

void add_fill(CLI::App& app, std::function<int()>& action) {
  auto* cmd = app.add_subcommand("fill", "Top-k completions for one or two [MASK] slots");
  struct Flags {
    std::string text, oracle_cmd, oracle_table, out;
    std::vector<std::string> candidates;
    std::size_t k = 5;
  };
  auto f = std::make_shared<Flags>();
  cmd->add_option("--text", f->text, "Text with one or two [MASK] sentinels")->required();
  cmd->add_option("--k", f->k, "Completions per mask");
  cmd->add_option("--candidates", f->candidates, "Candidate vocabulary")->delimiter(',');
  cmd->add_option("--oracle-cmd", f->oracle_cmd, "Oracle command speaking the wire protocol");
  cmd->add_option("--oracle-table", f->oracle_table, "Table oracle JSON file");
  cmd->add_option("--out", f->out, "Also write fill.txt here");

  cmd->callback([=, &action] {
    action = [=] {
      std::vector<std::string> candidates = f->candidates;
      std::unique_ptr<Oracle> oracle;
      if (!f->oracle_table.empty() && f->oracle_cmd.empty()) {
        auto table = TableOracle::load(f->oracle_table);
        if (candidates.empty()) {
          candidates = table.candidates_for(ScoringMode::Masked, 0, f->text);
          if (candidates.empty()) candidates = table.vocabulary();
        }
        oracle = std::make_unique<TableOracle>(std::move(table));
      } else {
        oracle = open_oracle(f->oracle_cmd, f->oracle_table);
        if (candidates.empty()) fail(ErrorCode::InvalidArgument, "--candidates is required with --oracle-cmd");
      }
      std::string text;
      for (const auto& c : fill_blank_topk(*oracle, f->text, candidates, f->k)) {
        std::string words;
        for (const auto& w : c.words) words += (words.empty() ? "" : " ") + w;
        text += fmt::format("{}\t{:.6f}\n", words, c.log_prob);
      }
      if (!f->out.empty()) {
        OutputSet outputs(f->out);
        outputs.add("fill.txt", text);
        report_written(outputs.commit());
      }
      std::cout << text;
      return 0;
    };
  });
}

// ---------------------------------------------------------------------------
// grl-demo

void add_grl_demo(CLI::App& app, std::function<int()>& action) {
  auto* cmd = app.add_subcommand("grl-demo", "Adversarial debiasing on synthetic data");
  struct Flags {
    std::string config, out = "grl_out";
    double lambda = 1.0;
    std::uint64_t seed = 0;
  };
  auto f = std::make_shared<Flags>();
  cmd->add_option("--config", f->config, "JSON with data, train and probe sections");
  auto* lambda = cmd->add_option("--lambda", f->lambda, "Reversal strength");
  auto* seed = cmd->add_option("--seed", f->seed, "Training seed");
  cmd->add_option("--out", f->out, "Output directory");

  cmd->callback([=, &action] {
    action = [=] {
      json doc = json::object();
      if (!f->config.empty()) doc = read_json_file(f->config);
      if (!doc.is_object()) fail(ErrorCode::InvalidArgument, "grl config must be an object");
      for (const auto& [key, value] : doc.items()) {
        if (key != "data" && key != "train" && key != "probe") {
          fail(ErrorCode::InvalidArgument, "unknown grl-demo config section '" + key + "'");
        }
      }
      const auto data_spec = synthetic_spec_from_json(doc.value("data", json::object()));
      auto train = grl_config_from_json(doc.value("train", json::object()));
      if (lambda->count()) train.lambda = f->lambda;
      if (seed->count()) train.seed = f->seed;
      validate(train);
      PosthocConfig probe;
      const auto p = doc.value("probe", json::object());
      probe.hidden = p.value("hidden", probe.hidden);
      probe.epochs = p.value("epochs", probe.epochs);
      probe.learning_rate = p.value("learning_rate", probe.learning_rate);
      probe.folds = p.value("folds", probe.folds);
      probe.seed = p.value("seed", train.seed);

      train.arch.encoder_dims.front() = data_spec.task_dims + data_spec.protected_dims;
      const auto data = gen_synthetic(data_spec);
      const auto debiased = train_adversarial(data, train);
      auto base_cfg = train;
      base_cfg.lambda = 0.0;
      const auto baseline = train_adversarial(data, base_cfg);
      auto plain_cfg = base_cfg;
      plain_cfg.arch.discriminators = 0;
      const auto plain = train_adversarial(data, plain_cfg);
      const bool same = plain.encoder_trajectory == baseline.encoder_trajectory;

      auto heldout = [&](const TrainReport& r) {
        const auto enc = encode(r.model.encoder, data);
        Dataset sub;
        sub.dim = enc.dim;
        for (auto i : r.heldout_rows) {
          const auto row = enc.row(i);
          sub.features.insert(sub.features.end(), row.begin(), row.end());
          sub.labels.push_back(enc.labels[i]);
          sub.protected_labels.push_back(enc.protected_labels[i]);
        }
        return posthoc_probe(sub, probe);
      };
      const auto base_probe = heldout(baseline);
      const auto debiased_probe = heldout(debiased);

      json report{{"train", to_json(train)},
                  {"baseline", to_json(baseline)},
                  {"debiased", to_json(debiased)},
                  {"lambda_zero_matches_no_adversary", same},
                  {"posthoc", {{"baseline", to_json(base_probe)}, {"debiased", to_json(debiased_probe)}}}};
      std::string md = "| Metric | Baseline | Debiased |\n|---|---|---|\n";
      const std::pair<const char*, double ProbeMetrics::*> metrics[] = {
          {"AUROC", &ProbeMetrics::auroc},
          {"Precision", &ProbeMetrics::precision},
          {"Recall", &ProbeMetrics::recall},
          {"AUPRC", &ProbeMetrics::auprc},
          {"Log Loss", &ProbeMetrics::log_loss}};
      for (const auto& [name, member] : metrics) {
        md += fmt::format("| {} | {:.3f} | {:.3f} |\n", name, base_probe.*member, debiased_probe.*member);
      }
      OutputSet outputs(f->out);
      outputs.add("grl_report.json", report.dump(2) + "\n");
      outputs.add("grl_probe.md", md);
      report_written(outputs.commit());
      std::cout << fmt::format(
          "task accuracy {:.3f}, adversary accuracy {:.3f} (chance {:.3f}), post-hoc AUROC {:.3f} -> {:.3f}\n",
          debiased.final_task_accuracy, debiased.final_adversary_accuracy, debiased.adversary_chance,
          base_probe.auroc, debiased_probe.auroc);
      return 0;
    };
  });
}

// ---------------------------------------------------------------------------
// report

void add_report(CLI::App& app, std::function<int()>& action) {
  auto* cmd = app.add_subcommand("report", "Merge gaps.csv files into one Markdown report");
  auto inputs = std::make_shared<std::vector<std::string>>();
  auto out = std::make_shared<std::string>("report_out");
  cmd->add_option("--inputs", *inputs, "gaps.csv files")->required();
  cmd->add_option("--out", *out, "Output directory");

  cmd->callback([=, &action] {
    action = [=] {
      std::vector<GapRow> rows;
      for (const auto& path : *inputs) {
        std::ifstream in(path);
        if (!in) fail(ErrorCode::IoError, "cannot open estimates file " + path);
        try {
          auto part = read_gaps_csv(in);
          rows.insert(rows.end(), part.begin(), part.end());
        } catch (const Error& e) {
          fail(e.code(), path + ": " + e.what());
        }
      }
      auto kinds = kinds_present(rows);
      if (kinds.empty()) kinds.assign(std::begin(kAllGapKinds), std::end(kAllGapKinds));
      const bool has_bh = std::ranges::any_of(rows, [](const GapRow& r) { return r.significant_bh.has_value(); });
      std::string md = "## Gap estimates\n\n" + render_gaps_markdown(rows) + "\n";
      md += render_summary_markdown(summarize_all(rows, false), kinds, "Bootstrap CI excludes zero");
      if (has_bh) {
        md += "\n" + render_summary_markdown(summarize_all(rows, true), kinds, "Benjamini-Hochberg corrected");
      }
      OutputSet outputs(*out);
      outputs.add("report.md", md);
      report_written(outputs.commit());
      return 0;
    };
  });
}

// ---------------------------------------------------------------------------
// synth-cohort

void add_synth_cohort(CLI::App& app, std::function<int()>& action) {
  auto* cmd = app.add_subcommand("synth-cohort", "Write the synthetic audit cohort");
  auto spec = std::make_shared<CohortSpec>();
  auto out = std::make_shared<std::string>("cohort_out");
  auto jsonl = std::make_shared<bool>(false);
  cmd->add_option("--tasks", spec->tasks, "Number of tasks");
  cmd->add_option("--planted", spec->planted, "Task indices with a planted recall gap")->delimiter(',');
  cmd->add_option("--seed", spec->seed, "Seed");
  cmd->add_flag("--jsonl", *jsonl, "Write JSONL instead of CSV");
  cmd->add_option("--out", *out, "Output directory");

  cmd->callback([=, &action] {
    action = [=] {
      const auto records = synthesize_cohort(*spec);
      std::ostringstream text;
      write_predictions(text, records, *jsonl ? FileFormat::Jsonl : FileFormat::Csv);
      OutputSet outputs(*out);
      outputs.add(*jsonl ? "cohort.jsonl" : "cohort.csv", text.str());
      report_written(outputs.commit());
      return 0;
    };
  });
}

// ---------------------------------------------------------------------------
// serve-table

void add_serve_table(CLI::App& app, std::function<int()>& action) {
  auto* cmd = app.add_subcommand("serve-table", "Answer wire-protocol queries from a table oracle");
  auto table = std::make_shared<std::string>();
  auto fail_after = std::make_shared<long>(-1);
  cmd->add_option("--table", *table, "Table oracle JSON file")->required();
  cmd->add_option("--fail-after", *fail_after, "Exit after answering this many requests");

  cmd->callback([=, &action] {
    action = [=] {
      const auto oracle = TableOracle::load(*table);
      long answered = 0;
      std::string line;
      while (std::getline(std::cin, line)) {
        if (line.empty()) continue;
        if (*fail_after >= 0 && answered >= *fail_after) return 3;
        OracleResponse r;
        try {
          r = oracle.answer(decode_query(line));
        } catch (const Error& e) {
          const auto obj = json::parse(line, nullptr, false);
          r.id = obj.is_object() && obj.contains("id") && obj["id"].is_number_integer()
                     ? obj["id"].get<std::int64_t>()
                     : -1;
          r.error = e.what();
        }
        std::cout << encode_response(r) << "\n" << std::flush;
        ++answered;
      }
      return 0;
    };
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fairness audit toolkit for probabilistic classifiers and masked-LM probes"};
  app.require_subcommand(1);
  std::function<int()> action;
  add_audit(app, action);
  add_merge(app, action);
  add_probe(app, action);
  add_fill(app, action);
  add_grl_demo(app, action);
  add_report(app, action);
  add_synth_cohort(app, action);
  add_serve_table(app, action);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    return action ? action() : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
