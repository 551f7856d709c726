#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

#include "hueplan/corpus.hpp"
#include "hueplan/environment.hpp"
#include "hueplan/planner.hpp"
#include "hueplan/preference.hpp"

namespace httplib {
class Server;
}

namespace hueplan {

struct ServiceConfig {
  std::uint64_t rng_seed = 0;
  /// Seed of the process-wide quantized state space.
  std::uint64_t quantize_seed = 0;
  std::size_t default_queries = 15;
  PreferenceParams preference{};
  QLearningConfig search{};
  /// Directory served at "/"; empty or missing disables static files.
  std::filesystem::path static_dir;
};

/// Status code plus a serialized JSON body.
struct Reply {
  int status = 200;
  std::string body;

  nlohmann::json json() const { return nlohmann::json::parse(body); }
};

struct Session;

/// Transport-independent session API; `install_routes` maps it onto HTTP.
class SessionService {
 public:
  SessionService(Corpus corpus, ServiceConfig config);
  ~SessionService();

  Reply create_session(const std::string& request_body);
  Reply get_query(const std::string& id);
  Reply post_response(const std::string& id, const std::string& request_body);
  Reply get_results(const std::string& id, bool finish, bool async);
  Reply snapshot(const std::string& id);
  /// Recreates a session from a snapshot document under a fresh id.
  Reply restore(const std::string& request_body);

  const ServiceConfig& config() const { return config_; }
  std::size_t session_count() const;

 private:
  std::shared_ptr<Session> find(const std::string& id) const;
  std::shared_ptr<const StateSpace> space();
  std::string next_id();

  Corpus corpus_;
  ServiceConfig config_;
  std::once_flag space_once_;
  std::shared_ptr<const StateSpace> space_;
  mutable std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t created_ = 0;
};

void install_routes(httplib::Server& server, SessionService& service);

/// Blocks serving HTTP until the server stops. Returns false if the bind fails.
bool serve(SessionService& service, const std::string& host, int port);

}  // namespace hueplan
