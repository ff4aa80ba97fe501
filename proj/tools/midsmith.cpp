// Copyright 2026 The Midsmith Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "midsmith/backends/image_store.hpp"
#include "midsmith/core/dataset.hpp"
#include "midsmith/core/digest.hpp"
#include "midsmith/core/error.hpp"
#include "midsmith/eval/report.hpp"
#include "midsmith/eval/runner.hpp"
#include "midsmith/forge/forge.hpp"
#include "midsmith/gateway/config.hpp"
#include "midsmith/gateway/gateway.hpp"
#include "midsmith/version.hpp"

namespace fs = std::filesystem;
using namespace midsmith;
using nlohmann::json;

namespace {

struct Globals {
  std::optional<std::string> config_file;
  std::optional<int> parallelism;
};

AppConfig load_config(const Globals& g) {
  AppConfig c = load_app_config(g.config_file);
  if (g.parallelism) {
    c.parallelism = *g.parallelism;
    c.validate();
  }
  return c;
}

std::shared_ptr<FsImageStore> open_store(const AppConfig& c,
                                         std::vector<fs::path> extra_assets = {}) {
  c.prepare_dirs();
  std::vector<fs::path> assets(c.asset_dirs.begin(), c.asset_dirs.end());
  for (auto& p : extra_assets) assets.push_back(std::move(p));
  return std::make_shared<FsImageStore>(c.image_store_dir, std::move(assets));
}

std::optional<Vocabulary> load_vocab(const AppConfig& c, const std::optional<std::string>& flag) {
  const auto path = flag ? flag : c.vocab_file;
  if (!path) return std::nullopt;
  return Vocabulary::load(*path);
}

template <class T, class Fn>
void write_jsonl(const fs::path& path, const std::vector<T>& items, Fn to) {
  std::string body;
  for (const auto& it : items) {
    body += to(it).dump();
    body += '\n';
  }
  write_file(path, body);
}

// ---------------------------------------------------------------------------
// serve

int cmd_serve(const Globals& g, const std::optional<std::string>& listen) {
  AppConfig c = load_config(g);
  if (listen) {
    c.listen_addr = *listen;
    c.validate();
  }
  c.prepare_dirs();

  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  Gateway gw(c, GatewayDeps::from_config(c));
  const int port = gw.bind(c.host(), c.port());
  std::cerr << "midsmith " << kVersion << " listening on " << c.host() << ":" << port << "\n";
  std::atomic<bool> signalled{false};
  std::jthread waiter([&gw, &signalled, set] {
    int sig = 0;
    sigwait(&set, &sig);
    signalled = true;
    std::cerr << "shutting down\n";
    gw.stop();
  });
  gw.run();
  gw.stop();
  // Wake the waiter if run() returned for another reason.
  if (!signalled) kill(getpid(), SIGTERM);
  return 0;
}

// ---------------------------------------------------------------------------
// chat

struct ChatOpts {
  std::optional<std::string> url;
  std::optional<std::uint64_t> seed;
};

void print_turn(const json& r) {
  if (r.value("modality", "") == "image") {
    std::cout << "[image] " << r.value("image_url", std::string("(none)")) << "\n"
              << "[prompt] " << r.value("drawing_prompt", std::string()) << "\n";
  } else {
    std::cout << r.value("text", std::string()) << "\n";
  }
  if (r.contains("correction_trace")) {
    std::cout << "[trace] " << r["correction_trace"].dump() << "\n";
  }
}

int cmd_chat(const Globals& g, const ChatOpts& o) {
  std::cout << "Type a message. \":image PATH\" attaches an image to the next message; "
               "\":quit\" exits.\n";
  std::optional<std::string> pending_image;

  std::unique_ptr<httplib::Client> client;
  std::string session_id;
  std::optional<AppConfig> cfg;
  std::shared_ptr<FsImageStore> store;
  std::optional<Engine> engine;
  std::optional<SessionSlot> slot;

  json create = json::object();
  if (o.seed) create["seed"] = *o.seed;
  if (o.url) {
    client = std::make_unique<httplib::Client>(*o.url);
    client->set_read_timeout(300, 0);
    auto res = client->Post("/v1/sessions", create.dump(), "application/json");
    if (!res || res->status != 201) throw Error(ErrorKind::BackendUnavailable, "cannot create session");
    const auto body = json::parse(res->body);
    session_id = body.at("session_id").get<std::string>();
    std::cout << "session " << session_id << " seed " << body.at("seed") << "\n";
  } else {
    cfg = load_config(g);
    store = open_store(*cfg);
    engine.emplace(cfg->engine, make_chat_backend(cfg->engine.chat, store),
                   make_t2i_backend(cfg->engine.t2i, store));
    slot.emplace(engine->new_session(o.seed));
    const auto snap = slot->snapshot();
    std::cout << "session " << snap.id << " seed " << snap.seed << "\n";
  }

  std::string line;
  while (std::cout << "> " << std::flush, std::getline(std::cin, line)) {
    if (line == ":quit") break;
    if (line.rfind(":image ", 0) == 0) {
      pending_image = read_file(line.substr(7));
      std::cout << "image attached\n";
      continue;
    }
    if (line.empty()) continue;
    try {
      if (client) {
        json body{{"text", line}};
        if (pending_image) body["image_b64"] = base64_encode(*pending_image);
        auto res = client->Post("/v1/sessions/" + session_id + "/messages", body.dump(),
                                "application/json");
        if (!res) throw Error(ErrorKind::BackendUnavailable, "gateway unreachable");
        const auto r = json::parse(res->body);
        if (res->status != 200) {
          std::cout << "error " << res->status << ": " << r.dump() << "\n";
        } else {
          print_turn(r);
        }
      } else {
        UserTurnInput user{line, std::nullopt};
        if (pending_image) user.image_ref = store->put(*pending_image);
        print_turn(message_response(engine->turn(*slot, user)));
      }
    } catch (const Error& e) {
      std::cout << "error: " << e.what() << "\n";
    }
    pending_image.reset();
  }
  return 0;
}

// ---------------------------------------------------------------------------
// eval / report

struct EvalOpts {
  std::string dataset;
  std::optional<std::string> score_only;
  bool coherence = false;
  bool two_step = false;
  std::optional<std::string> out;
  std::optional<std::string> vocab;
};

int cmd_eval(const Globals& g, const EvalOpts& o) {
  AppConfig c = load_config(g);
  std::vector<fs::path> extra;
  const auto assets = fs::path(o.dataset).parent_path() / "assets";
  if (fs::is_directory(assets)) extra.push_back(assets);
  auto store = open_store(c, extra);
  const auto vocab = load_vocab(c, o.vocab);
  const auto dataset = load_dataset(o.dataset, vocab ? &*vocab : nullptr);
  std::shared_ptr<VqaBackend> vqa;
  if (o.coherence) vqa = make_vqa_backend(c.vqa, store);
  const auto par = static_cast<std::size_t>(c.parallelism);

  EvalResult result;
  if (o.score_only) {
    result = score_run(load_inference_run(*o.score_only), dataset, vqa.get(), par);
  } else {
    EngineConfig ec = c.engine;
    ec.two_step = ec.two_step || o.two_step;
    const Engine engine(ec, make_chat_backend(ec.chat, store), make_t2i_backend(ec.t2i, store));
    result = evaluate_dataset(dataset, engine, vqa.get(), par);
  }
  const fs::path out = o.out ? fs::path(*o.out) : fs::path(c.report_dir) / fs::path(o.dataset).stem();
  write_eval_outputs(result, out);
  std::cout << render_table(result.ms, result.coherence ? &*result.coherence : nullptr);
  std::cerr << "wrote " << (out / "report.json").string() << "\n";
  return 0;
}

int cmd_report(const std::string& in, const std::string& out) {
  const auto run = load_inference_run(in);
  const auto ms = ms_accuracy(run.logs, run.failures.size());
  write_report(ms, nullptr, out);
  std::cout << render_table(ms, nullptr);
  return 0;
}

// ---------------------------------------------------------------------------
// forge

int cmd_compositions(int turns) {
  for (const auto& c : enumerate_compositions(turns)) std::cout << c.render() << "\n";
  return 0;
}

struct MetaOpts {
  std::optional<std::string> composition;
  std::optional<std::string> topic;
  std::optional<std::string> edit_type;
  std::string language = "en";
  std::optional<std::string> icl_file;
  std::size_t icl_n = 0;
  std::uint64_t seed = 0;
  bool all = false;
  int turns = 3;
  std::optional<std::string> vocab;
  std::optional<std::string> out;
};

int cmd_meta(const Globals& g, const MetaOpts& o) {
  const AppConfig c = load_config(g);
  const auto vocab = load_vocab(c, o.vocab);
  if (!vocab) throw Error(ErrorKind::InvalidConfig, "meta needs --vocab or vocab_file");
  std::vector<CaptionedPair> icl;
  if (o.icl_file) {
    std::vector<CaptionedPair> corpus;
    for (const auto& line : read_lines(*o.icl_file)) {
      corpus.push_back(captioned_pair_from_json(json::parse(line)));
    }
    icl = select_icl_samples(corpus, o.icl_n ? o.icl_n : corpus.size(), o.seed);
  }
  const Language lang = parse_language(o.language);
  if (!o.all) {
    if (!o.composition || !o.topic) {
      throw CLI::ValidationError("meta", "--composition and --topic are required without --all");
    }
    MetaPromptSpec spec{CompositionId::parse(*o.composition), *o.topic, o.edit_type, lang, icl};
    std::cout << build_meta_prompt(spec, *vocab);
    return 0;
  }
  std::string body;
  std::vector<std::optional<std::string>> edits{std::nullopt};
  for (const auto& e : vocab->edit_types) edits.emplace_back(e);
  for (const auto& comp : enumerate_compositions(o.turns)) {
    for (const auto& topic : vocab->topics) {
      for (const auto& edit : edits) {
        MetaPromptSpec spec{comp, topic, edit, lang, icl};
        nlohmann::ordered_json j;
        j["composition"] = comp.render();
        j["topic"] = topic;
        j["edit_type"] = edit ? json(*edit) : json(nullptr);
        j["language"] = std::string(to_string(lang));
        j["prompt"] = build_meta_prompt(spec, *vocab);
        body += j.dump() + "\n";
      }
    }
  }
  if (o.out) {
    write_file(*o.out, body);
  } else {
    std::cout << body;
  }
  return 0;
}

int cmd_mix(const std::string& d_o, const std::string& d_p, std::size_t conversations,
            std::size_t turns, std::uint64_t seed, const std::string& out) {
  const auto mixed = mix_pseudo_multiturn(load_instruction_samples(d_o),
                                          load_instruction_samples(d_p), conversations, turns, seed);
  save_instruction_samples(mixed, out);
  std::cerr << mixed.size() << " conversations written\n";
  return 0;
}

int cmd_recaption(const Globals& g, const std::string& images, const std::string& out,
                  const std::optional<std::string>& failures) {
  const AppConfig c = load_config(g);
  auto store = open_store(c);
  auto chat = make_chat_backend(c.captioner, store);
  std::vector<std::string> refs;
  for (const auto& line : read_lines(images)) refs.emplace_back(trim(line));
  const auto r = recaption_corpus(refs, *chat, c.engine.templates,
                                  static_cast<std::size_t>(c.parallelism));
  write_jsonl(out, r.pairs, [](const CaptionedPair& p) { return to_json(p); });
  if (failures) {
    write_jsonl(*failures, r.failures, [](const ItemFailure& f) {
      return nlohmann::ordered_json{{"image_ref", f.item}, {"error", f.error}};
    });
  }
  std::cerr << r.pairs.size() << " captioned, " << r.failures.size() << " failed\n";
  return 0;
}

int cmd_filter(const Globals& g, const std::string& dataset, const std::string& out,
               const std::optional<std::string>& rejected,
               const std::optional<std::string>& undecided) {
  const AppConfig c = load_config(g);
  auto store = open_store(c);
  auto judge = make_chat_backend(c.judge, store);
  const auto r = filter_intent_mismatch(load_dataset(dataset), *judge, c.engine.templates,
                                        static_cast<std::size_t>(c.parallelism));
  save_dataset(r.kept, out);
  if (rejected) {
    write_jsonl(*rejected, r.rejected, [](const RejectedRecord& x) {
      nlohmann::ordered_json j;
      j["record"] = to_json(x.record);
      j["mismatches"] = nlohmann::ordered_json::array();
      for (const auto& m : x.mismatches) {
        j["mismatches"].push_back({{"round", m.round},
                                   {"judged", std::string(to_string(m.judged))},
                                   {"expected", std::string(to_string(m.expected))}});
      }
      return j;
    });
  }
  if (undecided) {
    write_jsonl(*undecided, r.undecided, [](const UndecidedRecord& x) {
      return nlohmann::ordered_json{{"record", to_json(x.record)}, {"error", x.error}};
    });
  }
  std::cerr << r.kept.size() << " kept, " << r.rejected.size() << " rejected, "
            << r.undecided.size() << " undecided\n";
  return 0;
}

int cmd_corrections(const Globals& g, const std::string& in, const std::string& out,
                    const std::optional<std::string>& quarantine,
                    const std::optional<std::string>& review_csv) {
  const AppConfig c = load_config(g);
  auto store = open_store(c);
  auto teacher = make_chat_backend(c.teacher, store);
  const auto r = build_correction_dataset(load_correction_inputs(in), *teacher, c.engine.templates,
                                          static_cast<std::size_t>(c.parallelism));
  write_jsonl(out, r.samples, [](const CorrectionSample& s) { return to_json(s); });
  if (quarantine) {
    write_jsonl(*quarantine, r.quarantine, [](const QuarantinedCorrection& q) { return to_json(q); });
  }
  if (review_csv) export_review_csv(r.samples, *review_csv);
  std::cerr << r.samples.size() << " samples, " << r.quarantine.size() << " quarantined\n";
  return 0;
}

struct ExportOpts {
  std::optional<std::string> d_o, d_p, d_pm, d_t;
  bool with_dialogben = false;
  std::string out;
};

int cmd_export(const ExportOpts& o) {
  TrainingParts parts;
  if (o.d_o) parts.d_o = load_instruction_samples(*o.d_o);
  if (o.d_p) parts.d_p = load_instruction_samples(*o.d_p);
  if (o.d_pm) parts.d_pm = load_instruction_samples(*o.d_pm);
  if (o.d_t) parts.d_t = load_instruction_samples(*o.d_t);
  export_training_mix(parts, o.with_dialogben, o.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"midsmith: multi-modal dialogue orchestration and evaluation"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_file, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--parallelism", g.parallelism, "Override the configured parallelism")
      ->check(CLI::PositiveNumber);

  std::function<int()> action;

  auto* serve = app.add_subcommand("serve", "Run the HTTP gateway");
  std::optional<std::string> listen;
  serve->add_option("--listen", listen, "host:port");
  serve->callback([&] { action = [&] { return cmd_serve(g, listen); }; });

  auto* chat = app.add_subcommand("chat", "Interactive terminal session");
  ChatOpts chat_opts;
  chat->add_option("--url", chat_opts.url, "Gateway base URL; in-process engine when absent");
  chat->add_option("--seed", chat_opts.seed, "Generation seed for the session");
  chat->callback([&] { action = [&] { return cmd_chat(g, chat_opts); }; });

  auto* eval = app.add_subcommand("eval", "Run or re-score a benchmark evaluation");
  EvalOpts eval_opts;
  eval->add_option("--dataset", eval_opts.dataset, "Benchmark JSONL")->required()->check(CLI::ExistingFile);
  eval->add_option("--score-only", eval_opts.score_only, "Score existing turn logs")
      ->check(CLI::ExistingFile);
  eval->add_flag("--coherence", eval_opts.coherence, "Also compute the VQA coherence score");
  eval->add_flag("--two-step", eval_opts.two_step, "Self-correct each turn before answering");
  eval->add_option("--out", eval_opts.out, "Output directory");
  eval->add_option("--vocab", eval_opts.vocab, "Topic / edit-type vocabulary");
  eval->callback([&] { action = [&] { return cmd_eval(g, eval_opts); }; });

  auto* report = app.add_subcommand("report", "Render a report from turn logs");
  std::string report_in, report_out;
  report->add_option("--in", report_in, "Turn log JSONL")->required()->check(CLI::ExistingFile);
  report->add_option("--out", report_out, "Output directory")->required();
  report->callback([&] { action = [&] { return cmd_report(report_in, report_out); }; });

  auto* forge = app.add_subcommand("forge", "Offline data pipelines");
  forge->require_subcommand(1);

  auto* comps = forge->add_subcommand("compositions", "List conversation compositions");
  int comp_turns = 3;
  comps->add_option("--turns", comp_turns, "Turns per conversation (1-6)")->check(CLI::Range(1, 6));
  comps->callback([&] { action = [&] { return cmd_compositions(comp_turns); }; });

  auto* meta = forge->add_subcommand("meta", "Build generation meta-prompts");
  MetaOpts meta_opts;
  meta->add_option("--composition", meta_opts.composition, "e.g. T->I,IT->I,IT->T");
  meta->add_option("--topic", meta_opts.topic);
  meta->add_option("--edit-type", meta_opts.edit_type);
  meta->add_option("--language", meta_opts.language)->check(CLI::IsMember({"en", "cn"}));
  meta->add_option("--icl", meta_opts.icl_file, "Captioned pairs JSONL")->check(CLI::ExistingFile);
  meta->add_option("--icl-n", meta_opts.icl_n, "Number of in-context examples");
  meta->add_option("--seed", meta_opts.seed, "Sampling seed");
  meta->add_flag("--all", meta_opts.all, "Every composition, topic and edit type as JSONL");
  meta->add_option("--turns", meta_opts.turns)->check(CLI::Range(1, 6));
  meta->add_option("--vocab", meta_opts.vocab)->check(CLI::ExistingFile);
  meta->add_option("--out", meta_opts.out);
  meta->callback([&] { action = [&] { return cmd_meta(g, meta_opts); }; });

  auto* mix = forge->add_subcommand("mix", "Build pseudo multi-turn samples");
  std::string mix_o, mix_p, mix_out;
  std::size_t mix_conv = 0, mix_turns = 3;
  std::uint64_t mix_seed = 0;
  mix->add_option("--d-o", mix_o, "Single-turn open-source samples")->required()->check(CLI::ExistingFile);
  mix->add_option("--d-p", mix_p, "Single-turn prompt samples")->required()->check(CLI::ExistingFile);
  mix->add_option("--conversations", mix_conv)->required();
  mix->add_option("--turns", mix_turns)->check(CLI::PositiveNumber);
  mix->add_option("--seed", mix_seed);
  mix->add_option("--out", mix_out)->required();
  mix->callback([&] {
    action = [&] { return cmd_mix(mix_o, mix_p, mix_conv, mix_turns, mix_seed, mix_out); };
  });

  auto* recap = forge->add_subcommand("recaption", "Caption images with the captioner backend");
  std::string recap_in, recap_out;
  std::optional<std::string> recap_fail;
  recap->add_option("--images", recap_in, "One content address per line")->required()->check(CLI::ExistingFile);
  recap->add_option("--out", recap_out)->required();
  recap->add_option("--failures", recap_fail);
  recap->callback([&] { action = [&] { return cmd_recaption(g, recap_in, recap_out, recap_fail); }; });

  auto* filter = forge->add_subcommand("filter", "Drop records whose labels the judge disputes");
  std::string filter_in, filter_out;
  std::optional<std::string> filter_rej, filter_und;
  filter->add_option("--dataset", filter_in)->required()->check(CLI::ExistingFile);
  filter->add_option("--out", filter_out)->required();
  filter->add_option("--rejected", filter_rej);
  filter->add_option("--undecided", filter_und);
  filter->callback([&] {
    action = [&] { return cmd_filter(g, filter_in, filter_out, filter_rej, filter_und); };
  });

  auto* corr = forge->add_subcommand("corrections", "Build the error-correction dataset");
  std::string corr_in, corr_out;
  std::optional<std::string> corr_q, corr_csv;
  corr->add_option("--in", corr_in, "JSONL of {history?, question, original_output}")
      ->required()->check(CLI::ExistingFile);
  corr->add_option("--out", corr_out)->required();
  corr->add_option("--quarantine", corr_q);
  corr->add_option("--review-csv", corr_csv);
  corr->callback([&] { action = [&] { return cmd_corrections(g, corr_in, corr_out, corr_q, corr_csv); }; });

  auto* exp = forge->add_subcommand("export-mix", "Write a training mix and its manifest");
  ExportOpts exp_opts;
  exp->add_option("--d-o", exp_opts.d_o)->check(CLI::ExistingFile);
  exp->add_option("--d-p", exp_opts.d_p)->check(CLI::ExistingFile);
  exp->add_option("--d-pm", exp_opts.d_pm)->check(CLI::ExistingFile);
  exp->add_option("--d-t", exp_opts.d_t)->check(CLI::ExistingFile);
  exp->add_flag("--with-dialogben", exp_opts.with_dialogben, "Include benchmark training split");
  exp->add_option("--out", exp_opts.out)->required();
  exp->callback([&] { action = [&] { return cmd_export(exp_opts); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    return action();
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n" << app.help();
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
