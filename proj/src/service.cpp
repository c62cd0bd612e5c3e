#include "seqdiscover/service.hpp"

#include <chrono>
#include <cstdio>
#include <thread>

#include <httplib.h>

#include "seqdiscover/errors.hpp"

namespace seqdiscover {
namespace {

using json = nlohmann::json;

json round_record_json(const Session& session, const RoundRecord& record) {
  json j;
  j["t"] = record.t;
  j["hits"] = record.hits_this_round;
  j["cum_hits"] = record.cum_hits;
  j["recall"] = record.recall;
  if (!record.accuracy.empty()) {
    j["accuracy"] = record.accuracy;
    j["pos_recall"] = record.pos_recall;
  }
  json selected = json::array();
  for (const auto& s : session.run.selection_log())
    if (s.t == record.t)
      selected.push_back({{"id", s.id},
                          {"hit", s.was_target},
                          {"source_batch", s.source},
                          {"disclosed", s.disclosed}});
  j["selected"] = std::move(selected);
  return j;
}

int status_for(const Error& e) {
  if (e.code() == "session_not_found") return 404;
  if (e.code() == "wrong_phase") return 409;
  return 400;
}

}  // namespace

std::string phase_name(SessionPhase phase) {
  switch (phase) {
    case SessionPhase::AwaitingSelection: return "awaiting_selection";
    case SessionPhase::Training: return "training";
    case SessionPhase::Finished: return "finished";
  }
  return "unknown";
}

json error_payload(const std::string& code, const std::string& message) {
  return {{"error_code", code}, {"message", message}};
}

json recommendation_payload(Session& session) {
  auto& run = session.run;
  const auto& cfg = run.config();
  if (cfg.expert.knowledge_p > 0.0) run.roll_disclosure();
  const auto& rec = run.recommendation();
  const auto& disclosure = run.disclosure();

  json items = json::array();
  for (const auto& e : rec.union_entries()) {
    json item;
    item["id"] = e.rec->id;
    item["sequence"] = run.pool_corpus().molecule(e.rec->id).sequence;
    item["batch"] = e.batch;
    if (cfg.expert.meta_visible) {
      item["mu"] = e.rec->mu;
      item["sigma_d"] = e.rec->sigma_d;
      item["sigma_m"] = e.rec->sigma_m;
      item["r_un"] = e.rec->r_un;
      item["r_se"] = e.rec->r_se;
    }
    auto it = disclosure.known.find(e.rec->id);
    if (it != disclosure.known.end()) item["disclosed_labels"] = it->second;
    items.push_back(std::move(item));
  }
  json j;
  j["session_id"] = session.id;
  j["round"] = run.round();
  j["phase"] = phase_name(session.phase);
  j["B"] = cfg.B;
  j["recommendations"] = std::move(items);
  return j;
}

json round_payload(const Session& session, const RoundRecord& record) {
  return round_record_json(session, record);
}

json progress_payload(const Session& session) {
  json history = json::array();
  for (const auto& r : session.run.history())
    history.push_back(round_record_json(session, r));
  json j;
  j["session_id"] = session.id;
  j["round"] = session.run.round();
  j["phase"] = phase_name(session.phase);
  j["history"] = std::move(history);
  return j;
}

json phase_payload(const Session& session) {
  json j;
  j["session_id"] = session.id;
  j["phase"] = phase_name(session.phase);
  j["round"] = session.run.round();
  j["R"] = session.run.config().R;
  j["B"] = session.run.config().B;
  return j;
}

RunConfig session_config(const RunConfig& base, const json& body) {
  RunConfig cfg = base;
  try {
    if (body.contains("B")) cfg.B = body.at("B").get<int>();
    if (body.contains("R")) cfg.R = body.at("R").get<int>();
    if (body.contains("q")) cfg.q = body.at("q").get<int>();
    if (body.contains("h")) cfg.h = body.at("h").get<int>();
    if (body.contains("seed")) cfg.seed = body.at("seed").get<std::uint64_t>();
    if (body.contains("n_test"))
      cfg.n_test = body.at("n_test").get<std::size_t>();
    if (body.contains("expert_p"))
      cfg.expert.knowledge_p = body.at("expert_p").get<double>();
    if (body.contains("meta_visible"))
      cfg.expert.meta_visible = body.at("meta_visible").get<bool>();
    if (body.contains("policy"))
      cfg.policy.kind = policy_from_name(body.at("policy").get<std::string>());
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad session config: ") + e.what());
  }
  return cfg;
}

struct Service::Impl {
  httplib::Server server;
  std::thread listener;
};

Service::Service(Corpus corpus, RunConfig base_config,
                 const EmbeddingTable* table)
    : corpus_(std::move(corpus)),
      base_(std::move(base_config)),
      table_(table),
      impl_(new Impl) {}

Service::~Service() { stop(); }

std::shared_ptr<Session> Service::create_session(const json& body) {
  RunConfig cfg = session_config(base_, body);
  if (cfg.policy.kind != PolicyKind::HumanInLoop)
    throw ConfigInvalid("interactive sessions require the hil policy");
  std::lock_guard<std::mutex> lock(registry_mutex_);
  char sid[16];
  std::snprintf(sid, sizeof sid, "s%06llu",
                static_cast<unsigned long long>(next_id_++));
  auto session = std::make_shared<Session>(sid, std::move(cfg), corpus_,
                                           table_);
  sessions_.emplace(session->id, session);
  return session;
}

std::shared_ptr<Session> Service::find_session(const std::string& id) {
  std::lock_guard<std::mutex> lock(registry_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw SessionNotFound(id);
  return it->second;
}

json Service::submit_selection(const std::string& id, const json& body) {
  auto session = find_session(id);
  std::lock_guard<std::mutex> lock(session->mutex);
  if (session->phase == SessionPhase::Finished)
    throw WrongPhase("session already finished");
  if (session->phase == SessionPhase::Training)
    throw WrongPhase("session is retraining");
  std::vector<std::string> ids;
  try {
    ids = body.at("ids").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw BadSelection(std::string("body needs an ids array: ") + e.what());
  }
  session->phase = SessionPhase::Training;
  RoundRecord record;
  try {
    record = session->run.submit(ids);
  } catch (...) {
    session->phase = SessionPhase::AwaitingSelection;
    throw;
  }
  session->phase = session->run.finished() ? SessionPhase::Finished
                                           : SessionPhase::AwaitingSelection;
  json j;
  j["round_record"] = round_payload(*session, record);
  j["phase"] = phase_name(session->phase);
  if (!session->run.finished()) j["next"] = recommendation_payload(*session);
  return j;
}

int Service::start(const std::string& host, int port) {
  auto& svr = impl_->server;

  auto finish = [](httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.set_content(body.dump(), "application/json");
  };
  auto guarded = [finish](httplib::Response& res, auto&& fn) {
    try {
      finish(res, 200, fn());
    } catch (const Error& e) {
      finish(res, status_for(e), error_payload(e.code(), e.what()));
    } catch (const std::exception& e) {
      finish(res, 500, error_payload("internal", e.what()));
    }
  };
  auto parse_body = [](const std::string& body) {
    if (body.empty()) return json::object();
    json j = json::parse(body, nullptr, false);
    if (j.is_discarded()) throw ParseError("request body is not valid json");
    return j;
  };

  svr.Options(R"(.*)", [finish](const httplib::Request&,
                                httplib::Response& res) {
    finish(res, 204, json::object());
  });
  svr.Post("/sessions", [this, guarded, parse_body](
                            const httplib::Request& req,
                            httplib::Response& res) {
    guarded(res, [&] {
      auto session = create_session(parse_body(req.body));
      std::lock_guard<std::mutex> lock(session->mutex);
      return recommendation_payload(*session);
    });
  });
  svr.Post(R"(/sessions/([^/]+)/selection)",
           [this, guarded, parse_body](const httplib::Request& req,
                                       httplib::Response& res) {
             guarded(res, [&] {
               return submit_selection(req.matches[1], parse_body(req.body));
             });
           });
  svr.Get(R"(/sessions/([^/]+)/progress)",
          [this, guarded](const httplib::Request& req,
                          httplib::Response& res) {
            guarded(res, [&] {
              auto session = find_session(req.matches[1]);
              std::lock_guard<std::mutex> lock(session->mutex);
              return progress_payload(*session);
            });
          });
  svr.Get(R"(/sessions/([^/]+))", [this, guarded](const httplib::Request& req,
                                                  httplib::Response& res) {
    guarded(res, [&] {
      auto session = find_session(req.matches[1]);
      std::lock_guard<std::mutex> lock(session->mutex);
      return phase_payload(*session);
    });
  });

  if (port == 0) {
    port_ = svr.bind_to_any_port(host);
  } else {
    if (!svr.bind_to_port(host, port))
      throw ConfigInvalid("cannot bind " + host + ":" + std::to_string(port));
    port_ = port;
  }
  impl_->listener = std::thread([&svr] { svr.listen_after_bind(); });
  while (!svr.is_running())
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  return port_;
}

void Service::stop() {
  if (!impl_) return;
  if (impl_->server.is_running()) impl_->server.stop();
  if (impl_->listener.joinable()) impl_->listener.join();
}

void Service::wait() {
  if (impl_ && impl_->listener.joinable()) impl_->listener.join();
}

}  // namespace seqdiscover
