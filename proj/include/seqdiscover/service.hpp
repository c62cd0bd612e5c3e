#pragma once
// HTTP session API for the interactive expert workflow. A session wraps a
// SequentialRun; the human plays the simulated expert's part by submitting
// B ids per round. Payload builders are exposed separately so wire formats
// are testable without a socket.

#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <json.hpp>

#include "seqdiscover/engine.hpp"

namespace seqdiscover {

enum class SessionPhase { AwaitingSelection, Training, Finished };

std::string phase_name(SessionPhase phase);

struct Session {
  std::string id;
  SequentialRun run;
  SessionPhase phase = SessionPhase::AwaitingSelection;
  std::mutex mutex;  // one mutating request at a time

  Session(std::string sid, RunConfig cfg, const Corpus& corpus,
          const EmbeddingTable* table)
      : id(std::move(sid)), run(std::move(cfg), corpus, table) {}
};

// Wire formats. Score fields (mu, sigma_d, sigma_m, r_un, r_se) appear only
// when meta_visible; disclosed ids carry their true labels, which is the
// only pre-reveal ground-truth leak and is governed by expert.p.
nlohmann::json recommendation_payload(Session& session);
nlohmann::json round_payload(const Session& session, const RoundRecord& record);
nlohmann::json progress_payload(const Session& session);
nlohmann::json phase_payload(const Session& session);
nlohmann::json error_payload(const std::string& code,
                             const std::string& message);

// Applies the subset of config keys a session request may override.
RunConfig session_config(const RunConfig& base, const nlohmann::json& body);

// In-memory session registry plus the HTTP server on top of it.
class Service {
 public:
  Service(Corpus corpus, RunConfig base_config,
          const EmbeddingTable* table = nullptr);
  ~Service();

  // Registry operations (the HTTP layer is a thin shell over these).
  std::shared_ptr<Session> create_session(const nlohmann::json& body);
  std::shared_ptr<Session> find_session(const std::string& id);
  nlohmann::json submit_selection(const std::string& id,
                                  const nlohmann::json& body);

  // Serves until stop(); port 0 picks a free port. Returns the bound port.
  int start(const std::string& host, int port);
  void stop();
  void wait();  // blocks until the server stops (CLI serve loop)
  int port() const { return port_; }

 private:
  Corpus corpus_;
  RunConfig base_;
  const EmbeddingTable* table_;
  std::mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;
  int port_ = 0;
  struct Impl;  // httplib server + listen thread
  std::unique_ptr<Impl> impl_;
};

}  // namespace seqdiscover
