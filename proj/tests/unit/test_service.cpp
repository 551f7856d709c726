#include <doctest.h>

#include <thread>

#include <httplib.h>

#include "hueplan/colormap.hpp"
#include "hueplan/service.hpp"
#include "support.hpp"

using namespace hueplan;
using nlohmann::json;

namespace {

ServiceConfig test_config() {
  ServiceConfig c;
  c.rng_seed = 99;
  c.search.episodes = 2000;
  return c;
}

SessionService& shared_service() {
  static SessionService service(testing::starter(), test_config());
  return service;
}

/// Live HTTP server on an ephemeral port for the lifetime of the fixture.
struct LiveServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;

  explicit LiveServer(SessionService& service) {
    install_routes(server, service);
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~LiveServer() {
    server.stop();
    thread.join();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(120, 0);
    return c;
  }
};

std::string create(SessionService& svc, const std::string& seed, int n = -1) {
  json body{{"seed", seed}};
  if (n >= 0) body["n_queries"] = n;
  const Reply r = svc.create_session(body.dump());
  REQUIRE(r.status == 201);
  return r.json()["session_id"];
}

json answer(SessionService& svc, const std::string& sid, int choice) {
  const Reply q = svc.get_query(sid);
  REQUIRE(q.status == 200);
  const Reply r = svc.post_response(sid, json{{"query_id", q.json()["query_id"]}, {"choice", choice}}.dump());
  REQUIRE(r.status == 200);
  return r.json();
}

}  // namespace

TEST_SUITE("service") {
  TEST_CASE("HTTP session walk-through") {
    LiveServer live(shared_service());
    auto cli = live.client();

    auto res = cli.Post("/sessions", R"({"seed": "#186E8D"})", "application/json");
    REQUIRE(res);
    CHECK(res->status == 201);
    const json created = json::parse(res->body);
    const std::string sid = created["session_id"];
    const std::size_t count = created["candidate_count"];
    CHECK(count > 0);

    res = cli.Post("/sessions", R"({"seed": "zzz"})", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
    res = cli.Post("/sessions", "not json", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);

    res = cli.Get("/sessions/" + sid + "/query");
    REQUIRE(res);
    CHECK(res->status == 200);
    const json q = json::parse(res->body);
    CHECK(q["remaining"] == 15);
    CHECK(q["left"].size() == 256);
    CHECK(q["right"].size() == 256);
    CHECK(q["left"] != q["right"]);

    res = cli.Get("/sessions/" + sid + "/query");
    REQUIRE(res);
    CHECK(json::parse(res->body) == q);

    res = cli.Post("/sessions/" + sid + "/responses", json{{"query_id", q["query_id"]}, {"choice", 3}}.dump(),
                   "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);

    res = cli.Get("/sessions/" + sid + "/results");
    REQUIRE(res);
    CHECK(res->status == 409);

    const std::string ok = json{{"query_id", q["query_id"]}, {"choice", 1}}.dump();
    res = cli.Post("/sessions/" + sid + "/responses", ok, "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(json::parse(res->body)["remaining"] == 14);
    res = cli.Post("/sessions/" + sid + "/responses", ok, "application/json");
    REQUIRE(res);
    CHECK(res->status == 409);

    for (int i = 0; i < 14; ++i) {
      res = cli.Get("/sessions/" + sid + "/query");
      REQUIRE(res);
      REQUIRE(res->status == 200);
      const json next = json::parse(res->body);
      CHECK(next["remaining"] == 14 - i);
      res = cli.Post("/sessions/" + sid + "/responses", json{{"query_id", next["query_id"]}, {"choice", i % 3}}.dump(),
                     "application/json");
      REQUIRE(res);
      CHECK(json::parse(res->body)["remaining"] == 13 - i);
    }
    res = cli.Get("/sessions/" + sid + "/query");
    REQUIRE(res);
    CHECK(res->status == 409);

    res = cli.Get("/sessions/" + sid + "/results");
    REQUIRE(res);
    REQUIRE(res->status == 200);
    const std::string first = res->body;
    const json results = json::parse(first);
    REQUIRE(results["ranking"].size() == count);
    for (std::size_t i = 1; i < count; ++i) {
      CHECK(results["ranking"][i]["score"].get<double>() <= results["ranking"][i - 1]["score"].get<double>());
    }
    for (const auto& r : results["ranking"]) CHECK(r["colors"].size() == 256);
    if (!results["novel"].is_null()) {
      std::vector<LabColor> colors;
      for (const auto& h : results["novel"]["colors"]) colors.push_back(parse_hex_lab(h.get<std::string>()));
      CHECK(colors.size() == 256);
      // Hex rounding moves samples by up to half an 8-bit step, so only the coarse invariants are rechecked here.
      CHECK(colors.front().L > 99.0);
      CHECK(profile(colors).flatness >= 0.99);
    }
    res = cli.Get("/sessions/" + sid + "/results");
    REQUIRE(res);
    CHECK(res->body == first);

    res = cli.Get("/sessions/" + sid + "/snapshot");
    REQUIRE(res);
    CHECK(res->status == 200);

    res = cli.Get("/sessions/nope/query");
    REQUIRE(res);
    CHECK(res->status == 404);
    res = cli.Get("/sessions/nope/results");
    REQUIRE(res);
    CHECK(res->status == 404);
  }

  TEST_CASE("seeds with too few candidates are refused with suggestions") {
    const Reply r = shared_service().create_session(R"({"seed": "#6600FF"})");
    CHECK(r.status == 422);
    const json body = r.json();
    CHECK(body["error"].get<std::string>().find("seed color unsupported") != std::string::npos);
    REQUIRE_FALSE(body["suggestions"].empty());
    for (const auto& s : body["suggestions"]) {
      CHECK(shared_service().create_session(json{{"seed", s}}.dump()).status == 201);
    }
  }

  TEST_CASE("request validation") {
    auto& svc = shared_service();
    CHECK(svc.create_session("{}").status == 400);
    CHECK(svc.create_session(R"({"seed": "#186E8D", "n_queries": -1})").status == 400);
    CHECK(svc.create_session(R"({"seed": "#186E8D", "n_queries": "3"})").status == 400);
    CHECK(svc.create_session("[1]").status == 400);
    const std::string sid = create(svc, "#186E8D", 2);
    const json q = svc.get_query(sid).json();
    CHECK(svc.post_response(sid, R"({"choice": 1})").status == 400);
    CHECK(svc.post_response(sid, json{{"query_id", q["query_id"]}, {"choice", "1"}}.dump()).status == 400);
    CHECK(svc.post_response(sid, json{{"query_id", "other"}, {"choice", 1}}.dump()).status == 409);
    CHECK(svc.post_response("missing", json{{"query_id", q["query_id"]}, {"choice", 1}}.dump()).status == 404);
    CHECK(svc.snapshot("missing").status == 404);
  }

  TEST_CASE("early finish and async results") {
    auto& svc = shared_service();
    const std::string sid = create(svc, "#4E79A7");
    answer(svc, sid, 1);
    CHECK(svc.get_results(sid, false, false).status == 409);
    Reply r = svc.get_results(sid, true, true);
    CHECK((r.status == 202 || r.status == 200));
    if (r.status == 202) CHECK(r.json()["poll"] == "/sessions/" + sid + "/results");
    for (int i = 0; i < 600 && r.status == 202; ++i) {
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
      r = svc.get_results(sid, false, true);
    }
    REQUIRE(r.status == 200);
    CHECK(svc.get_results(sid, false, false).body == r.body);
    CHECK(svc.get_query(sid).status == 409);
  }

  TEST_CASE("sessions are isolated") {
    auto& svc = shared_service();
    const std::string a = create(svc, "#186E8D");
    const std::string b = create(svc, "#186E8D");
    CHECK(a != b);
    const json qa = svc.get_query(a).json();
    const json before = svc.snapshot(b).json();
    answer(svc, a, 2);
    CHECK(svc.snapshot(b).json() == before);
    // A query id from one session is not accepted by another.
    const json qb = svc.get_query(b).json();
    CHECK(svc.post_response(b, json{{"query_id", qa["query_id"]}, {"choice", 1}}.dump()).status == 409);
    CHECK(qb["remaining"] == 15);
  }

  TEST_CASE("replaying a response sequence reproduces the results") {
    const std::vector<int> script{1, 2, 0, 1, 1};
    std::vector<std::string> bodies;
    for (int run = 0; run < 2; ++run) {
      SessionService svc(testing::starter(), test_config());
      const std::string sid = create(svc, "#59A14F", 5);
      for (int c : script) answer(svc, sid, c);
      bodies.push_back(svc.get_results(sid, false, false).body);
    }
    CHECK(bodies[0] == bodies[1]);
  }

  TEST_CASE("snapshots restore into an equivalent session") {
    auto& svc = shared_service();
    const std::string sid = create(svc, "#E15759", 4);
    answer(svc, sid, 1);
    answer(svc, sid, 2);
    const json q = svc.get_query(sid).json();
    const Reply snap = svc.snapshot(sid);
    REQUIRE(snap.status == 200);

    const Reply restored = svc.restore(snap.body);
    REQUIRE(restored.status == 201);
    const std::string rid = restored.json()["session_id"];
    CHECK(rid != sid);
    CHECK(svc.get_query(rid).json() == q);

    for (const auto& id : {sid, rid}) {
      CHECK(svc.post_response(id, json{{"query_id", q["query_id"]}, {"choice", 0}}.dump()).status == 200);
      answer(svc, id, 1);
    }
    CHECK(svc.get_results(sid, false, false).body == svc.get_results(rid, false, false).body);

    const Reply finished = svc.restore(svc.snapshot(sid).body);
    REQUIRE(finished.status == 201);
    CHECK(svc.get_results(finished.json()["session_id"], false, false).body == svc.get_results(sid, false, false).body);

    CHECK(svc.restore("{}").status == 400);
    json bad = snap.json();
    bad["model"]["history"][0]["left"] = 100000;
    CHECK(svc.restore(bad.dump()).status == 400);
  }
}
