// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "promptdfd/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "promptdfd/errors.hpp"

namespace dfd {

using nlohmann::json;

Method method_from_string(const std::string& s) {
  if (s == "vanilla") return Method::kVanilla;
  if (s == "random_text") return Method::kRandomText;
  if (s == "unlabel") return Method::kUnlabel;
  if (s == "manual") return Method::kManual;
  if (s == "rl") return Method::kRl;
  throw InvalidArgument("unknown method '" + s + "' (expected vanilla, random_text, unlabel, manual or rl)");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::kVanilla: return "vanilla";
    case Method::kRandomText: return "random_text";
    case Method::kUnlabel: return "unlabel";
    case Method::kManual: return "manual";
    case Method::kRl: return "rl";
  }
  return "?";
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> m = {Method::kVanilla, Method::kRandomText, Method::kUnlabel, Method::kManual,
                                        Method::kRl};
  return m;
}

namespace {

// Reads keys of one JSON object, remembering which were consumed so that
// leftovers can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw ValidationError(child(key), std::string("wrong type: ") + e.what());
    }
  }

  const json* sub(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ValidationError(child(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void check(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw ValidationError(path, what);
}

}  // namespace

void ExperimentConfig::validate() const {
  try {
    world.validate();
  } catch (const InvalidArgument& e) {
    throw ValidationError("world", e.what());
  }
  check(data.teacher_train >= 1, "data.teacher_train", "must be >= 1");
  check(data.dev >= 1, "data.dev", "must be >= 1");
  check(data.test >= 1, "data.test", "must be >= 1");
  check(data.generator_corpus >= 1, "data.generator_corpus", "must be >= 1");
  check(data.transfer >= 1, "data.transfer", "must be >= 1");
  check(data.unlabel_background_mix >= 0.0 && data.unlabel_background_mix <= 1.0, "data.unlabel_background_mix",
        "must be in [0, 1]");
  check(teacher.dim >= 1, "teacher.dim", "must be >= 1");
  check(teacher.buckets >= 1, "teacher.buckets", "must be >= 1");
  check(teacher.init_scale >= 0.0, "teacher.init_scale", "must be >= 0");
  check(teacher.train.lr >= 0.0, "teacher.lr", "must be >= 0");
  check(teacher.train.batch >= 1, "teacher.batch", "must be >= 1");
  check(generator.order >= 1 && generator.order <= 8, "generator.order", "must be in [1, 8]");
  check(generator.k_smooth > 0.0, "generator.k_smooth", "must be > 0");
  check(student_dim >= 1 && student_dim <= teacher.dim, "student.dim", "must be in [1, teacher.dim]");
  check(kd.alpha >= 0.0 && kd.alpha <= 1.0, "kd.alpha", "must be in [0, 1]");
  check(kd.tau > 0.0, "kd.tau", "must be > 0");
  check(kd.lr >= 0.0, "kd.lr", "must be >= 0");
  check(kd.batch >= 1, "kd.batch", "must be >= 1");
  check(rl.repeat_lambda >= 0.0, "rl.repeat_lambda", "must be >= 0");
  check(rl.lr >= 0.0, "rl.lr", "must be >= 0");
  check(rl.rollouts >= 1, "rl.rollouts", "must be >= 1");
  check(!rl.initial_tokens.empty(), "rl.initial_tokens", "must be non-empty");
  check(rl.prompts_per_epoch >= 1, "rl.prompts_per_epoch", "must be >= 1");
  check(rl.prompt_length >= 2 && rl.prompt_length < kMaxLen, "rl.prompt_length", "must be in [2, 127]");
  check(rl.update_every >= 1, "rl.update_every", "must be >= 1");
  check(rl.prompter_dim >= 1, "rl.prompter_dim", "must be >= 1");
  check(rl.prompter_window >= 1, "rl.prompter_window", "must be >= 1");
  check(decode.top_k >= 1, "decode.top_k", "must be >= 1");
  check(decode.top_p > 0.0 && decode.top_p <= 1.0, "decode.top_p", "must be in (0, 1]");
  check(decode.max_len >= 1 && decode.max_len <= kMaxLen, "decode.max_len", "must be in [1, 128]");
  check(!manual.templates.empty(), "manual.templates", "must be non-empty");
  check(!seeds.empty(), "seeds", "must be non-empty");
  for (std::size_t n : sweep_lengths) check(n >= 2 && n < kMaxLen, "sweep_lengths", "lengths must be in [2, 127]");

  // Token-level checks against the world's vocabulary.
  std::set<std::string> vocab(world.background.begin(), world.background.end());
  for (const auto& ks : world.keywords) vocab.insert(ks.begin(), ks.end());
  for (const auto& t : rl.initial_tokens)
    check(vocab.count(t) > 0, "rl.initial_tokens", "token '" + t + "' is not in the world vocabulary");
  for (const auto& tmpl : manual.templates)
    for (const auto& w : split_whitespace(tmpl)) {
      if (w == ManualPromptSource::kPlaceholder) continue;
      check(vocab.count(w) > 0, "manual.templates", "token '" + w + "' is not in the world vocabulary");
    }
  for (const auto& n : world.class_names)
    check(vocab.count(n) > 0, "world.class_names", "class name '" + n + "' is not in the world vocabulary");
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  ObjectReader root(j, "");
  if (const json* w = root.sub("world")) {
    ObjectReader r(*w, "world");
    auto& s = cfg.world;
    r.get("class_names", s.class_names);
    r.get("keywords", s.keywords);
    r.get("background", s.background);
    r.get("keyword_boost", s.keyword_boost);
    r.get("background_keyword_factor", s.background_keyword_factor);
    r.get("background_successors", s.background_successors);
    r.get("keyword_successors", s.keyword_successors);
    r.get("min_len", s.min_len);
    r.get("max_len", s.max_len);
    r.get("background_mix", s.background_mix);
    r.get("seed", s.seed);
    r.finish();
  }
  if (const json* d = root.sub("data")) {
    ObjectReader r(*d, "data");
    r.get("teacher_train", cfg.data.teacher_train);
    r.get("dev", cfg.data.dev);
    r.get("test", cfg.data.test);
    r.get("generator_corpus", cfg.data.generator_corpus);
    r.get("transfer", cfg.data.transfer);
    r.get("unlabel_background_mix", cfg.data.unlabel_background_mix);
    r.finish();
  }
  if (const json* t = root.sub("teacher")) {
    ObjectReader r(*t, "teacher");
    r.get("dim", cfg.teacher.dim);
    r.get("buckets", cfg.teacher.buckets);
    r.get("init_scale", cfg.teacher.init_scale);
    r.get("epochs", cfg.teacher.train.epochs);
    r.get("lr", cfg.teacher.train.lr);
    r.get("batch", cfg.teacher.train.batch);
    std::string opt = to_string(cfg.teacher.train.optimizer);
    r.get("optimizer", opt);
    try {
      cfg.teacher.train.optimizer = optimizer_from_string(opt);
    } catch (const InvalidArgument& e) {
      throw ValidationError("teacher.optimizer", e.what());
    }
    r.finish();
  }
  if (const json* g = root.sub("generator")) {
    ObjectReader r(*g, "generator");
    r.get("order", cfg.generator.order);
    r.get("k_smooth", cfg.generator.k_smooth);
    r.finish();
  }
  if (const json* s = root.sub("student")) {
    ObjectReader r(*s, "student");
    r.get("dim", cfg.student_dim);
    r.finish();
  }
  if (const json* k = root.sub("kd")) {
    ObjectReader r(*k, "kd");
    r.get("alpha", cfg.kd.alpha);
    r.get("tau", cfg.kd.tau);
    r.get("lr", cfg.kd.lr);
    r.get("batch", cfg.kd.batch);
    r.get("epochs", cfg.kd.epochs);
    std::string opt = to_string(cfg.kd.optimizer);
    r.get("optimizer", opt);
    try {
      cfg.kd.optimizer = optimizer_from_string(opt);
    } catch (const InvalidArgument& e) {
      throw ValidationError("kd.optimizer", e.what());
    }
    r.finish();
  }
  if (const json* l = root.sub("rl")) {
    ObjectReader r(*l, "rl");
    std::string reward = to_string(cfg.rl.reward);
    r.get("reward", reward);
    try {
      cfg.rl.reward = reward_mode_from_string(reward);
    } catch (const InvalidArgument& e) {
      throw ValidationError("rl.reward", e.what());
    }
    r.get("repeat_lambda", cfg.rl.repeat_lambda);
    r.get("lr", cfg.rl.lr);
    r.get("rollouts", cfg.rl.rollouts);
    r.get("initial_tokens", cfg.rl.initial_tokens);
    r.get("prompts_per_epoch", cfg.rl.prompts_per_epoch);
    r.get("prompt_length", cfg.rl.prompt_length);
    r.get("baseline", cfg.rl.baseline);
    r.get("symmetric_repeat", cfg.rl.symmetric_repeat);
    r.get("update_every", cfg.rl.update_every);
    std::string opt = to_string(cfg.rl.optimizer);
    r.get("optimizer", opt);
    try {
      cfg.rl.optimizer = optimizer_from_string(opt);
    } catch (const InvalidArgument& e) {
      throw ValidationError("rl.optimizer", e.what());
    }
    r.get("prompter_dim", cfg.rl.prompter_dim);
    r.get("prompter_window", cfg.rl.prompter_window);
    r.get("prompter_init_scale", cfg.rl.prompter_init_scale);
    r.finish();
  }
  if (const json* d = root.sub("decode")) {
    ObjectReader r(*d, "decode");
    r.get("top_k", cfg.decode.top_k);
    r.get("top_p", cfg.decode.top_p);
    r.get("max_new_tokens", cfg.decode.max_new_tokens);
    r.get("max_len", cfg.decode.max_len);
    r.finish();
  }
  if (const json* m = root.sub("manual")) {
    ObjectReader r(*m, "manual");
    r.get("templates", cfg.manual.templates);
    r.finish();
  }
  std::string method = to_string(cfg.method);
  root.get("method", method);
  try {
    cfg.method = method_from_string(method);
  } catch (const InvalidArgument& e) {
    throw ValidationError("method", e.what());
  }
  root.get("seed", cfg.seed);
  root.get("seeds", cfg.seeds);
  root.get("sweep_lengths", cfg.sweep_lengths);
  root.get("output_dir", cfg.output_dir);
  root.finish();
  cfg.validate();
  return cfg;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["world"] = {{"class_names", c.world.class_names},
                {"keywords", c.world.keywords},
                {"background", c.world.background},
                {"keyword_boost", c.world.keyword_boost},
                {"background_keyword_factor", c.world.background_keyword_factor},
                {"background_successors", c.world.background_successors},
                {"keyword_successors", c.world.keyword_successors},
                {"min_len", c.world.min_len},
                {"max_len", c.world.max_len},
                {"background_mix", c.world.background_mix},
                {"seed", c.world.seed}};
  j["data"] = {{"teacher_train", c.data.teacher_train},     {"dev", c.data.dev},
               {"test", c.data.test},                       {"generator_corpus", c.data.generator_corpus},
               {"transfer", c.data.transfer},               {"unlabel_background_mix", c.data.unlabel_background_mix}};
  j["teacher"] = {{"dim", c.teacher.dim},
                  {"buckets", c.teacher.buckets},
                  {"init_scale", c.teacher.init_scale},
                  {"epochs", c.teacher.train.epochs},
                  {"lr", c.teacher.train.lr},
                  {"batch", c.teacher.train.batch},
                  {"optimizer", to_string(c.teacher.train.optimizer)}};
  j["generator"] = {{"order", c.generator.order}, {"k_smooth", c.generator.k_smooth}};
  j["student"] = {{"dim", c.student_dim}};
  j["kd"] = {{"alpha", c.kd.alpha},   {"tau", c.kd.tau},       {"lr", c.kd.lr},
             {"batch", c.kd.batch},   {"epochs", c.kd.epochs}, {"optimizer", to_string(c.kd.optimizer)}};
  j["rl"] = {{"reward", to_string(c.rl.reward)},
             {"repeat_lambda", c.rl.repeat_lambda},
             {"lr", c.rl.lr},
             {"rollouts", c.rl.rollouts},
             {"initial_tokens", c.rl.initial_tokens},
             {"prompts_per_epoch", c.rl.prompts_per_epoch},
             {"prompt_length", c.rl.prompt_length},
             {"baseline", c.rl.baseline},
             {"symmetric_repeat", c.rl.symmetric_repeat},
             {"update_every", c.rl.update_every},
             {"optimizer", to_string(c.rl.optimizer)},
             {"prompter_dim", c.rl.prompter_dim},
             {"prompter_window", c.rl.prompter_window},
             {"prompter_init_scale", c.rl.prompter_init_scale}};
  j["decode"] = {{"top_k", c.decode.top_k},
                 {"top_p", c.decode.top_p},
                 {"max_new_tokens", c.decode.max_new_tokens},
                 {"max_len", c.decode.max_len}};
  j["manual"] = {{"templates", c.manual.templates}};
  j["method"] = to_string(c.method);
  j["seed"] = c.seed;
  j["seeds"] = c.seeds;
  j["sweep_lengths"] = c.sweep_lengths;
  j["output_dir"] = c.output_dir;
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path.string(), "cannot open config file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string(), std::string("malformed JSON: ") + e.what());
  }
  return config_from_json(j);
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  const std::string s = config_to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace dfd
