// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "promptdfd/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "promptdfd/checkpoint.hpp"
#include "promptdfd/config.hpp"
#include "promptdfd/errors.hpp"
#include "promptdfd/eval.hpp"
#include "promptdfd/experiment.hpp"

namespace dfd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kStageTag = 0x7374616765;  // "stage"

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError(path.string(), "cannot open for writing");
  out << text;
  if (!out) throw ValidationError(path.string(), "write failed");
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// What each stage's artifact was built from; a mismatch means the artifact
// is stale for the current config.
std::string world_inputs(const ExperimentConfig& c) { return config_to_json(c)["world"].dump(); }

std::string teacher_inputs(const ExperimentConfig& c) {
  const auto j = config_to_json(c);
  return json{{"world", j["world"]}, {"data", j["data"]}, {"teacher", j["teacher"]}}.dump();
}

std::string generator_inputs(const ExperimentConfig& c) {
  const auto j = config_to_json(c);
  return json{{"world", j["world"]}, {"data", j["data"]}, {"generator", j["generator"]}}.dump();
}

struct Layout {
  fs::path out;
  fs::path world() const { return out / "world.ckpt"; }
  fs::path teacher() const { return out / "teacher.ckpt"; }
  fs::path generator() const { return out / "generator.ckpt"; }
  fs::path method_dir(Method m) const { return out / "distill" / to_string(m); }
};

Checkpoint require_checkpoint(const fs::path& path, const std::string& stage, const std::string& inputs_block,
                              const std::string& expected_inputs) {
  if (!fs::exists(path))
    throw PrerequisiteError("missing " + path.string() + "; run `promptdfd " + stage + "` first");
  auto ckpt = load_checkpoint(path);
  const auto& b = ckpt.at(inputs_block);
  if (b.dtype != DType::kStr || b.str.size() != 1 || b.str[0] != expected_inputs)
    throw PrerequisiteError(path.string() + " was built from a different config; run `promptdfd " + stage +
                            "` again");
  return ckpt;
}

Checkpoint stage_checkpoint(const ExperimentConfig& cfg, std::uint64_t tag) {
  Checkpoint c;
  c.config_hash = config_hash(cfg);
  c.rng = RngStream(cfg.seed, {kStageTag, tag});
  return c;
}

void put_world(Checkpoint& ckpt, const World& world, const ExperimentConfig& cfg) {
  put_vocab(ckpt, world.vocab());
  ckpt.blocks["world.inputs"] = Block::of(std::vector<std::string>{world_inputs(cfg)});
  for (std::size_t c = 0; c < world.num_classes(); ++c) {
    const auto& t = world.class_chain(c);
    ckpt.blocks["world.class_chain." + std::to_string(c)] = Block::of(t.probs, {t.dim, t.dim});
  }
  const auto& bg = world.background_chain();
  ckpt.blocks["world.background_chain"] = Block::of(bg.probs, {bg.dim, bg.dim});
}

// Rebuilds the shared fixtures from the stage checkpoints.
Setup load_setup(const ExperimentConfig& cfg, const Layout& layout) {
  auto wck = require_checkpoint(layout.world(), "gen-world", "world.inputs", world_inputs(cfg));
  auto tck = require_checkpoint(layout.teacher(), "train-teacher", "teacher.inputs", teacher_inputs(cfg));
  auto gck = require_checkpoint(layout.generator(), "pretrain-generator", "generator.inputs", generator_inputs(cfg));
  Setup s{make_world(cfg.world), {}, get_classifier(tck, "teacher"), get_count_lm(gck, "generator")};
  if (get_vocab(wck).tokens() != s.world.vocab().tokens())
    throw PrerequisiteError("vocabulary in " + layout.world().string() + " differs; run `promptdfd gen-world` again");
  s.data = make_datasets(s.world, cfg.data);
  return s;
}

std::vector<TokenSeq> read_corpus(const fs::path& path, const Vocab& vocab) {
  std::ifstream in(path);
  std::vector<TokenSeq> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(encode(vocab, line, kMaxLen));
  return out;
}

json epochs_json(const std::vector<EpochLog>& log) {
  json a = json::array();
  for (const auto& e : log)
    a.push_back({{"epoch", e.epoch}, {"loss", e.loss}, {"dev_accuracy", e.dev_accuracy}, {"agreement", e.agreement}});
  return a;
}

std::string epochs_csv(const std::vector<EpochLog>& log) {
  std::string s = "epoch,loss,dev_accuracy,agreement\n";
  for (const auto& e : log)
    s += std::to_string(e.epoch) + "," + fmt(e.loss) + "," + fmt(e.dev_accuracy) + "," + fmt(e.agreement) + "\n";
  return s;
}

json report_header(const ExperimentConfig& cfg) {
  return {{"config", config_to_json(cfg)}, {"config_hash", hex64(config_hash(cfg))}};
}

// ---- subcommands --------------------------------------------------------

void cmd_gen_world(const ExperimentConfig& cfg, const Layout& layout, std::ostream& out) {
  const auto world = make_world(cfg.world);
  auto ckpt = stage_checkpoint(cfg, 1);
  put_world(ckpt, world, cfg);
  save_checkpoint(layout.world(), ckpt);
  auto report = report_header(cfg);
  report["vocab_size"] = world.vocab().size();
  report["num_classes"] = world.num_classes();
  write_json(layout.out / "world.json", report);
  out << "wrote " << layout.world().string() << " (vocab " << world.vocab().size() << ", " << world.num_classes()
      << " classes)\n";
}

void cmd_train_teacher(const ExperimentConfig& cfg, const Layout& layout, std::ostream& out) {
  require_checkpoint(layout.world(), "gen-world", "world.inputs", world_inputs(cfg));
  const auto world = make_world(cfg.world);
  const auto data = make_datasets(world, cfg.data);
  SupervisedLog log;
  const auto teacher = train_teacher(world, data, cfg.teacher, &log);
  auto ckpt = stage_checkpoint(cfg, 2);
  put_vocab(ckpt, world.vocab());
  put_classifier(ckpt, "teacher", teacher);
  ckpt.blocks["teacher.inputs"] = Block::of(std::vector<std::string>{teacher_inputs(cfg)});
  save_checkpoint(layout.teacher(), ckpt);

  std::string csv = "epoch,loss\n";
  for (std::size_t e = 0; e < log.epoch_loss.size(); ++e) csv += std::to_string(e) + "," + fmt(log.epoch_loss[e]) + "\n";
  write_text(layout.out / "teacher_report.csv", csv);
  auto report = report_header(cfg);
  report["epoch_loss"] = log.epoch_loss;
  report["dev_accuracy"] = accuracy(teacher, data.dev);
  report["test_accuracy"] = accuracy(teacher, data.test);
  report["per_class_test_accuracy"] = per_class_accuracy(teacher, data.test);
  write_json(layout.out / "teacher_report.json", report);
  out << "teacher dev accuracy " << fmt(report["dev_accuracy"].get<double>()) << ", test accuracy "
      << fmt(report["test_accuracy"].get<double>()) << "\n";
}

void cmd_pretrain_generator(const ExperimentConfig& cfg, const Layout& layout, std::ostream& out) {
  require_checkpoint(layout.world(), "gen-world", "world.inputs", world_inputs(cfg));
  const auto world = make_world(cfg.world);
  const auto generator = pretrain_generator(world, cfg.data, cfg.generator);
  auto ckpt = stage_checkpoint(cfg, 3);
  put_vocab(ckpt, world.vocab());
  put_count_lm(ckpt, "generator", generator);
  ckpt.blocks["generator.inputs"] = Block::of(std::vector<std::string>{generator_inputs(cfg)});
  save_checkpoint(layout.generator(), ckpt);
  auto report = report_header(cfg);
  report["histories"] = generator.tables().size();
  report["checksum"] = hex64(generator.checksum());
  write_json(layout.out / "generator_report.json", report);
  out << "generator: " << generator.tables().size() << " histories, checksum " << hex64(generator.checksum())
      << "\n";
}

void cmd_distill(const ExperimentConfig& cfg, const Layout& layout, std::ostream& out) {
  const auto setup = load_setup(cfg, layout);
  const auto r = run_method(setup, cfg, cfg.method, cfg.seed);
  const auto dir = layout.method_dir(cfg.method);
  fs::create_directories(dir);

  auto ckpt = stage_checkpoint(cfg, 4);
  ckpt.rng = RngStream(cfg.seed, {kStageTag, 4, static_cast<std::uint64_t>(cfg.method)});
  put_vocab(ckpt, setup.world.vocab());
  put_classifier(ckpt, "student", r.student);
  save_checkpoint(dir / "student.ckpt", ckpt);
  if (r.prompter && cfg.method == Method::kRl) {
    auto pck = stage_checkpoint(cfg, 5);
    put_vocab(pck, setup.world.vocab());
    put_neural_lm(pck, "prompter", *r.prompter);
    save_checkpoint(dir / "prompter.ckpt", pck);
  }

  write_text(dir / "report.csv", epochs_csv(r.log));
  auto report = report_header(cfg);
  report["method"] = to_string(cfg.method);
  report["seed"] = cfg.seed;
  report["test_accuracy"] = r.test_accuracy;
  report["test_agreement"] = r.test_agreement;
  report["transfer_size"] = r.transfer.size();
  report["epochs"] = epochs_json(r.log);
  if (r.report) {
    const auto& rep = *r.report;
    report["epoch_mean_q"] = rep.epoch_mean_q;
    report["epoch_duplicate_rate"] = rep.epoch_duplicate_rate;
    report["epoch_prompts"] = rep.epoch_prompts;
    report["final_duplicate_rate"] = duplicate_token_rate(rep.final_prompts);
    report["q_completions"] = rep.q_completions;
    report["student_completions"] = rep.student_completions;
    report["generator_checksum_before"] = hex64(rep.generator_checksum_before);
    report["generator_checksum_after"] = hex64(rep.generator_checksum_after);
    std::string text;
    for (const auto& x : r.transfer) text += decode(setup.world.vocab(), x) + "\n";
    write_text(dir / "transfer.txt", text);
  }
  write_json(dir / "report.json", report);
  out << to_string(cfg.method) << ": test accuracy " << fmt(r.test_accuracy) << ", agreement "
      << fmt(r.test_agreement) << "\n";
}

void cmd_eval(const ExperimentConfig& cfg, const Layout& layout, std::ostream& out) {
  const auto setup = load_setup(cfg, layout);
  const auto& vocab = setup.world.vocab();
  std::string csv = "model,accuracy,agreement\n";
  auto report = report_header(cfg);
  const double t_acc = accuracy(setup.teacher, setup.data.test);
  csv += "teacher," + fmt(t_acc) + "," + fmt(1.0) + "\n";
  report["models"]["teacher"] = {{"accuracy", t_acc}, {"agreement", 1.0}};

  std::map<std::string, std::vector<TokenSeq>> corpora;
  std::vector<TokenSeq> train;
  for (const auto& ex : setup.data.train) train.push_back(ex.x);
  corpora["train"] = std::move(train);
  auto bg_rng = RngStream(cfg.world.seed, {kStageTag, 6});
  corpora["background"] = sample_unlabeled(setup.world, cfg.data.transfer, true, bg_rng, 1.0);

  std::size_t students = 0;
  for (Method m : all_methods()) {
    const auto dir = layout.method_dir(m);
    if (!fs::exists(dir / "student.ckpt")) continue;
    const auto student = get_classifier(load_checkpoint(dir / "student.ckpt"), "student");
    const double acc = accuracy(student, setup.data.test);
    const double agr = agreement(setup.teacher, student, setup.data.test);
    csv += to_string(m) + "," + fmt(acc) + "," + fmt(agr) + "\n";
    report["models"][to_string(m)] = {{"accuracy", acc}, {"agreement", agr}};
    ++students;
    if (fs::exists(dir / "transfer.txt")) corpora["synthesized_" + to_string(m)] = read_corpus(dir / "transfer.txt", vocab);
  }
  if (students == 0) throw PrerequisiteError("no student checkpoints under " + (layout.out / "distill").string() +
                                             "; run `promptdfd distill` first");
  write_text(layout.out / "eval.csv", csv);

  const auto keywords = setup.world.all_keyword_ids();
  std::string kcsv = "keyword,corpus,rate_per_1000\n";
  for (const auto& [name, corpus] : corpora) {
    const auto freq = keyword_frequency(corpus, keywords);
    for (TokenId k : keywords) kcsv += vocab.token(k) + "," + name + "," + fmt(freq.at(k)) + "\n";
    report["keyword_rate_per_1000"][name] = keyword_rate(corpus, keywords);
  }
  write_text(layout.out / "keywords.csv", kcsv);
  write_json(layout.out / "eval.json", report);
  out << "evaluated teacher and " << students << " student(s)\n";
}

std::vector<std::uint64_t> run_seeds(const ExperimentConfig& cfg, bool seed_given) {
  return seed_given ? std::vector<std::uint64_t>{cfg.seed} : cfg.seeds;
}

void cmd_sweep(const ExperimentConfig& cfg, const Layout& layout, bool seed_given, std::ostream& out) {
  const auto setup = load_setup(cfg, layout);
  const auto seeds = run_seeds(cfg, seed_given);
  std::ofstream csv(layout.out / "sweep.csv", std::ios::binary);
  csv << "length,seed,accuracy,agreement\n" << std::flush;
  const auto rows = prompt_length_sweep(setup, cfg, cfg.sweep_lengths, seeds, [&](const SweepRow& r) {
    csv << r.key << "," << r.seed << "," << fmt(r.accuracy) << "," << fmt(r.agreement) << "\n" << std::flush;
    out << "length " << r.key << " seed " << r.seed << ": agreement " << fmt(r.agreement) << "\n";
  });
  auto report = report_header(cfg);
  report["seeds"] = seeds;
  std::string best;
  double best_agr = -1.0;
  for (std::size_t n : cfg.sweep_lengths) {
    std::vector<double> agr;
    for (const auto& r : rows)
      if (r.key == std::to_string(n)) agr.push_back(r.agreement);
    const double m = median(agr);
    report["median_agreement"][std::to_string(n)] = m;
    if (m > best_agr) best_agr = m, best = std::to_string(n);
  }
  report["best_length"] = best;
  write_json(layout.out / "sweep.json", report);
  out << "best prompt length by median agreement: " << best << "\n";
}

void cmd_ablate(const ExperimentConfig& cfg, const Layout& layout, bool seed_given, std::ostream& out) {
  const auto setup = load_setup(cfg, layout);
  const auto seeds = run_seeds(cfg, seed_given);
  std::ofstream csv(layout.out / "ablation.csv", std::ios::binary);
  csv << "variant,seed,accuracy,agreement\n" << std::flush;
  const auto rows = ablation_suite(setup, cfg, seeds, [&](const AblationRow& a) {
    const auto& r = a.row;
    csv << r.key << "," << r.seed << "," << fmt(r.accuracy) << "," << fmt(r.agreement) << "\n" << std::flush;
    out << r.key << " seed " << r.seed << ": agreement " << fmt(r.agreement) << "\n";
  });
  auto report = report_header(cfg);
  report["seeds"] = seeds;
  for (const auto& v : ablation_variants()) {
    std::vector<double> agr, dup;
    for (const auto& a : rows)
      if (a.row.key == v) agr.push_back(a.row.agreement), dup.push_back(a.duplicate_rate);
    report["variants"][v] = {{"config_hash", hex64(config_hash(ablation_config(cfg, v)))},
                             {"median_agreement", median(agr)},
                             {"median_duplicate_rate", median(dup)}};
  }
  write_json(layout.out / "ablation.json", report);
}

void emit_error(std::ostream& err, const std::string& kind, const std::string& message, const std::string& path = {}) {
  json j = {{"error", kind}, {"message", message}};
  if (!path.empty()) j["path"] = path;
  err << j.dump() << "\n";
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Data-free knowledge distillation with a reinforced topic prompter", "promptdfd"};
  app.require_subcommand(1, 1);

  std::string config_path, out_dir, method;
  std::uint64_t seed = 0;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"gen-world", "Realize the synthetic world and write world.ckpt"},
      {"train-teacher", "Train the teacher classifier on labeled world data"},
      {"pretrain-generator", "Fit the frozen content generator"},
      {"distill", "Distill a student with the chosen method"},
      {"eval", "Evaluate all students and keyword frequencies"},
      {"sweep", "Prompt-length sweep over seeds"},
      {"ablate", "Ablation over reward mode and repeat penalty"}};
  for (const auto& [name, desc] : commands) {
    auto* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", config_path, "Experiment config (JSON)")->required();
    sub->add_option("--seed", seed, "Run seed (overrides the config)");
    sub->add_option("--out", out_dir, "Output directory (overrides the config)");
    if (name == "distill")
      sub->add_option("--method", method, "vanilla, random_text, unlabel, manual or rl");
  }

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::Success&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    emit_error(err, "usage", e.what());
    return kExitUsage;
  }

  try {
    auto cfg = load_config(config_path);
    const auto* sub = app.get_subcommands().front();
    const bool seed_given = sub->count("--seed") > 0;
    if (seed_given) cfg.seed = seed;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (!method.empty()) cfg.method = method_from_string(method);
    cfg.validate();
    const Layout layout{cfg.output_dir};
    fs::create_directories(layout.out);

    const std::string cmd = sub->get_name();
    if (cmd == "gen-world") cmd_gen_world(cfg, layout, out);
    else if (cmd == "train-teacher") cmd_train_teacher(cfg, layout, out);
    else if (cmd == "pretrain-generator") cmd_pretrain_generator(cfg, layout, out);
    else if (cmd == "distill") cmd_distill(cfg, layout, out);
    else if (cmd == "eval") cmd_eval(cfg, layout, out);
    else if (cmd == "sweep") cmd_sweep(cfg, layout, seed_given, out);
    else if (cmd == "ablate") cmd_ablate(cfg, layout, seed_given, out);
    return kExitOk;
  } catch (const ValidationError& e) {
    emit_error(err, "validation", e.what(), e.path());
    return kExitValidation;
  } catch (const PrerequisiteError& e) {
    emit_error(err, "prerequisite", e.what());
    return kExitPrerequisite;
  } catch (const InvalidArgument& e) {
    emit_error(err, "invalid_argument", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    emit_error(err, "failure", e.what());
    return kExitFailure;
  }
}

}  // namespace dfd
