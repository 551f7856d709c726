#include "hueplan/service.hpp"

#include <cctype>
#include <future>
#include <sstream>

#include <httplib.h>

#include "hueplan/colormap.hpp"
#include "hueplan/engine.hpp"
#include "hueplan/error.hpp"
#include "hueplan/rng.hpp"

namespace hueplan {

using nlohmann::json;

struct Session {
  std::mutex mutex;
  std::string id;
  std::string seed_hex;
  std::size_t n_queries = 0;
  std::shared_ptr<const Engine> engine;
  std::optional<PreferenceModel> model;
  Rng rng;
  std::uint64_t search_seed = 0;
  std::size_t issued = 0;
  std::optional<Query> outstanding;
  std::string outstanding_id;
  std::string outstanding_body;
  std::shared_future<std::string> results;

  std::size_t answered() const { return model->history().size(); }
  std::size_t remaining() const { return n_queries - answered(); }
  bool closed() const { return results.valid(); }
};

namespace {

Reply reply(int status, const json& body) { return {status, body.dump()}; }

Reply error(int status, const std::string& message) {
  return reply(status, json{{"error", message}});
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::string> candidate_hex(const Engine& e, std::size_t index) {
  return to_hex_list(finalize(e.candidates().at(index), e.graph()).colors);
}

std::string compute_results(std::shared_ptr<const Engine> e, PreferenceModel model,
                            QLearningConfig config, std::uint64_t seed) {
  json ranking = json::array();
  for (const auto& r : rank_corpus(model, e->features, e->ids)) {
    ranking.push_back(
        {{"id", e->ids[r.index]}, {"score", r.score}, {"colors", candidate_hex(*e, r.index)}});
  }
  const Weights theta = model.mean();
  const SearchResult found = search(e->graph(), e->reward, theta, config, e->candidates(), seed);
  json novel = nullptr;
  if (found.colormap) {
    novel = {{"colors", to_hex_list(found.colormap->colors)},
             {"reward", dot(theta, e->reward.featurize(*found.best))}};
  }
  return json{{"ranking", ranking}, {"novel", novel}}.dump();
}

json parse_body(const std::string& body) {
  try {
    json doc = json::parse(body);
    if (!doc.is_object()) throw ValidationError("request body must be a JSON object");
    return doc;
  } catch (const json::parse_error&) {
    throw ValidationError("request body is not valid JSON");
  }
}

}  // namespace

SessionService::SessionService(Corpus corpus, ServiceConfig config)
    : corpus_(std::move(corpus)), config_(std::move(config)) {}

SessionService::~SessionService() = default;

std::size_t SessionService::session_count() const {
  std::lock_guard lock(sessions_mutex_);
  return sessions_.size();
}

std::shared_ptr<const StateSpace> SessionService::space() {
  std::call_once(space_once_, [&] {
    space_ = std::make_shared<const StateSpace>(quantize_gamut(config_.quantize_seed));
  });
  return space_;
}

std::shared_ptr<Session> SessionService::find(const std::string& id) const {
  std::lock_guard lock(sessions_mutex_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

std::string SessionService::next_id() {
  std::lock_guard lock(sessions_mutex_);
  std::ostringstream os;
  os << std::hex << derive_seed(config_.rng_seed, ++created_);
  return "s" + os.str();
}

Reply SessionService::create_session(const std::string& request_body) {
  LabColor seed;
  std::size_t n = config_.default_queries;
  std::string hex;
  try {
    const json doc = parse_body(request_body);
    if (!doc.contains("seed") || !doc["seed"].is_string()) return error(400, "missing seed");
    hex = upper(doc["seed"].get<std::string>());
    seed = parse_hex_lab(hex);
    if (doc.contains("n_queries")) {
      const auto& q = doc["n_queries"];
      if (!q.is_number_integer() || q.get<long long>() < 0 || q.get<long long>() > 1000) {
        return error(400, "n_queries must be an integer in [0, 1000]");
      }
      n = q.get<std::size_t>();
    }
  } catch (const ValidationError& e) {
    return error(400, e.what());
  }

  auto s = std::make_shared<Session>();
  try {
    auto engine = std::make_shared<const Engine>(Engine::create(corpus_, seed, space()));
    if (engine->candidates().size() < 2) {
      throw UnsupportedSeedError("seed color unsupported: fewer than 2 corpus colormaps align to " + hex,
                                 suggest_seeds(corpus_, seed, space()));
    }
    s->engine = std::move(engine);
  } catch (const UnsupportedSeedError& e) {
    json sug = json::array();
    for (const auto& c : e.suggestions()) sug.push_back(to_hex(c));
    return reply(422, json{{"error", e.what()}, {"suggestions", sug}});
  }

  const std::uint64_t base = derive_seed(config_.rng_seed, fnv1a(hex));
  s->id = next_id();
  s->seed_hex = hex;
  s->n_queries = n;
  s->rng.seed(derive_seed(base, 0));
  s->search_seed = derive_seed(base, 1);
  s->model = PreferenceModel::prior(config_.preference, s->rng);

  const std::size_t count = s->engine->candidates().size();
  {
    std::lock_guard lock(sessions_mutex_);
    sessions_[s->id] = s;
  }
  return reply(201, json{{"session_id", s->id}, {"candidate_count", count}});
}

Reply SessionService::get_query(const std::string& id) {
  auto s = find(id);
  if (!s) return error(404, "unknown session");
  std::lock_guard lock(s->mutex);
  if (s->closed()) return error(409, "session finished");
  if (s->remaining() == 0) return error(409, "query budget exhausted");
  if (s->outstanding) return {200, s->outstanding_body};

  const Query q = acquire_query(*s->model, s->engine->features);
  s->outstanding = q;
  s->outstanding_id = s->id + "-q" + std::to_string(++s->issued);
  s->outstanding_body = json{{"query_id", s->outstanding_id},
                             {"left", candidate_hex(*s->engine, q.left)},
                             {"right", candidate_hex(*s->engine, q.right)},
                             {"remaining", s->remaining()}}
                            .dump();
  return {200, s->outstanding_body};
}

Reply SessionService::post_response(const std::string& id, const std::string& request_body) {
  auto s = find(id);
  if (!s) return error(404, "unknown session");
  json doc;
  try {
    doc = parse_body(request_body);
  } catch (const ValidationError& e) {
    return error(400, e.what());
  }
  if (!doc.contains("choice") || !doc["choice"].is_number_integer()) {
    return error(400, "choice must be 0, 1 or 2");
  }
  const auto choice = choice_from_int(doc["choice"].get<int>());
  if (!choice) return error(400, "choice must be 0, 1 or 2");
  if (!doc.contains("query_id") || !doc["query_id"].is_string()) return error(400, "missing query_id");

  std::lock_guard lock(s->mutex);
  if (s->closed()) return error(409, "session finished");
  if (!s->outstanding || doc["query_id"].get<std::string>() != s->outstanding_id) {
    return error(409, "stale or unknown query_id");
  }
  const Query q = *s->outstanding;
  const Engine& e = *s->engine;
  s->model = update_belief(*s->model,
                           Comparison{q.left, q.right, e.features[q.left], e.features[q.right], *choice},
                           s->rng);
  s->outstanding.reset();
  s->outstanding_id.clear();
  s->outstanding_body.clear();
  return reply(200, json{{"remaining", s->remaining()}});
}

Reply SessionService::get_results(const std::string& id, bool finish, bool async) {
  auto s = find(id);
  if (!s) return error(404, "unknown session");
  std::shared_future<std::string> results;
  {
    std::lock_guard lock(s->mutex);
    if (!s->results.valid()) {
      if (s->remaining() > 0 && !finish) return error(409, "training incomplete");
      QLearningConfig cfg = config_.search;
      s->results = std::async(std::launch::async, compute_results, s->engine, *s->model, cfg,
                              s->search_seed)
                       .share();
      s->outstanding.reset();
    }
    results = s->results;
  }
  if (async && results.wait_for(std::chrono::seconds(0)) != std::future_status::ready) {
    return reply(202, json{{"status", "pending"}, {"poll", "/sessions/" + id + "/results"}});
  }
  try {
    return {200, results.get()};
  } catch (const std::exception& e) {
    return error(500, e.what());
  }
}

Reply SessionService::snapshot(const std::string& id) {
  auto s = find(id);
  if (!s) return error(404, "unknown session");
  std::lock_guard lock(s->mutex);
  std::ostringstream rng_state;
  rng_state << s->rng;
  json outstanding = nullptr;
  if (s->outstanding) {
    outstanding = {{"query_id", s->outstanding_id},
                   {"left", s->outstanding->left},
                   {"right", s->outstanding->right}};
  }
  json results = nullptr;
  if (s->results.valid() && s->results.wait_for(std::chrono::seconds(0)) == std::future_status::ready) {
    results = json::parse(s->results.get());
  }
  return reply(200, json{{"session_id", s->id},
                         {"seed", s->seed_hex},
                         {"n_queries", s->n_queries},
                         {"issued", s->issued},
                         {"search_seed", s->search_seed},
                         {"rng", rng_state.str()},
                         {"model", model_to_json(*s->model)},
                         {"outstanding", outstanding},
                         {"results", results}});
}

Reply SessionService::restore(const std::string& request_body) {
  auto s = std::make_shared<Session>();
  try {
    const json doc = parse_body(request_body);
    s->seed_hex = upper(doc.at("seed").get<std::string>());
    const LabColor seed = parse_hex_lab(s->seed_hex);
    s->engine = std::make_shared<const Engine>(Engine::create(corpus_, seed, space()));
    s->n_queries = doc.at("n_queries").get<std::size_t>();
    s->issued = doc.at("issued").get<std::size_t>();
    s->search_seed = doc.at("search_seed").get<std::uint64_t>();
    std::istringstream rng_state(doc.at("rng").get<std::string>());
    rng_state >> s->rng;
    if (!rng_state) throw ValidationError("bad rng state");
    s->model = model_from_json(doc.at("model"));
    const std::size_t count = s->engine->candidates().size();
    for (const auto& c : s->model->history()) {
      if (c.left >= count || c.right >= count) throw ValidationError("history does not match corpus");
    }
    if (s->answered() > s->n_queries) throw ValidationError("history longer than n_queries");
    if (!doc.at("outstanding").is_null()) {
      const auto& o = doc["outstanding"];
      const Query q{o.at("left").get<std::size_t>(), o.at("right").get<std::size_t>()};
      if (q.left >= count || q.right >= count) throw ValidationError("outstanding query out of range");
      s->outstanding = q;
      s->outstanding_id = o.at("query_id").get<std::string>();
      s->outstanding_body = json{{"query_id", s->outstanding_id},
                                 {"left", candidate_hex(*s->engine, q.left)},
                                 {"right", candidate_hex(*s->engine, q.right)},
                                 {"remaining", s->remaining()}}
                                .dump();
    }
    if (doc.contains("results") && !doc["results"].is_null()) {
      std::promise<std::string> done;
      done.set_value(doc["results"].dump());
      s->results = done.get_future().share();
    }
  } catch (const json::exception& e) {
    return error(400, std::string("malformed snapshot: ") + e.what());
  } catch (const ValidationError& e) {
    return error(400, e.what());
  }
  s->id = next_id();
  {
    std::lock_guard lock(sessions_mutex_);
    sessions_[s->id] = s;
  }
  return reply(201, json{{"session_id", s->id}, {"candidate_count", s->engine->candidates().size()}});
}

void install_routes(httplib::Server& server, SessionService& service) {
  auto send = [](httplib::Response& res, const Reply& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  auto flag = [](const httplib::Request& req, const char* name) {
    return req.has_param(name) && req.get_param_value(name) != "0";
  };

  server.Post("/sessions", [&service, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service.create_session(req.body));
  });
  server.Post("/sessions/restore", [&service, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service.restore(req.body));
  });
  server.Get("/sessions/:id/query", [&service, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service.get_query(req.path_params.at("id")));
  });
  server.Post("/sessions/:id/responses",
              [&service, send](const httplib::Request& req, httplib::Response& res) {
                send(res, service.post_response(req.path_params.at("id"), req.body));
              });
  server.Get("/sessions/:id/results",
             [&service, send, flag](const httplib::Request& req, httplib::Response& res) {
               send(res, service.get_results(req.path_params.at("id"), flag(req, "finish"),
                                             flag(req, "async")));
             });
  server.Get("/sessions/:id/snapshot", [&service, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service.snapshot(req.path_params.at("id")));
  });

  const auto& dir = service.config().static_dir;
  if (!dir.empty() && std::filesystem::is_directory(dir)) server.set_mount_point("/", dir.string());

  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    res.status = 500;
    res.set_content(json{{"error", what}}.dump(), "application/json");
  });
}

bool serve(SessionService& service, const std::string& host, int port) {
  httplib::Server server;
  install_routes(server, service);
  return server.listen(host, port);
}

}  // namespace hueplan
