#include <doctest.h>

#include <cstdlib>
#include <random>

#include <nlohmann/json.hpp>

#include "cefr/errors.hpp"
#include "cefr/providers.hpp"

using namespace cefr;
using nlohmann::json;

namespace {

// Replays a fixed sequence of responses; entries with status 0 simulate
// transport-level failures.
class ScriptedTransport : public Transport {
public:
    explicit ScriptedTransport(std::vector<HttpResponse> script)
        : script_(std::move(script)) {}

    HttpResponse post(const std::string&, const std::string& path,
                      const std::map<std::string, std::string>& headers,
                      const std::string& body) override {
        ++calls_;
        last_path_ = path;
        last_body_ = body;
        last_headers_ = headers;
        if (calls_ > script_.size()) throw ProviderError("script exhausted");
        const HttpResponse& r = script_[calls_ - 1];
        if (r.status == 0) throw ProviderError("simulated transport failure");
        return r;
    }

    std::size_t calls_ = 0;
    std::string last_path_, last_body_;
    std::map<std::string, std::string> last_headers_;

private:
    std::vector<HttpResponse> script_;
};

std::string completion_body(const std::string& content) {
    return json{{"choices", {{{"message", {{"content", content}}}}}}}.dump();
}

ProviderConfig test_config() {
    ProviderConfig config;
    config.base_url = "http://unit.test";
    config.model_id = "test-model";
    config.api_key_env = "CEFR_TEST_KEY";
    config.max_retries = 3;
    config.backoff_initial_ms = 0;
    return config;
}

struct KeyGuard {
    KeyGuard() { setenv("CEFR_TEST_KEY", "sk-test", 1); }
    ~KeyGuard() { unsetenv("CEFR_TEST_KEY"); }
};

}  // namespace

TEST_CASE("chat_complete extracts the first completion") {
    KeyGuard key;
    auto transport = std::make_shared<ScriptedTransport>(
        std::vector<HttpResponse>{{200, completion_body("Bonjour !")}});
    ChatClient client(test_config(), transport);
    CHECK(client.chat_complete("sys", "user") == "Bonjour !");
    const json sent = json::parse(transport->last_body_);
    CHECK(sent["model"] == "test-model");
    CHECK(sent["messages"][0]["role"] == "system");
    CHECK(sent["messages"][1]["content"] == "user");
    CHECK(transport->last_headers_.at("Authorization") == "Bearer sk-test");
}

TEST_CASE("two transient failures then success uses 3 attempts") {
    KeyGuard key;
    set_retry_sleep_hook([](std::size_t) {});
    auto transport = std::make_shared<ScriptedTransport>(std::vector<HttpResponse>{
        {0, ""}, {503, "unavailable"}, {200, completion_body("ok")}});
    ChatClient client(test_config(), transport);
    CHECK(client.chat_complete("s", "u") == "ok");
    CHECK(transport->calls_ == 3);
    set_retry_sleep_hook(nullptr);
}

TEST_CASE("auth failures never retry") {
    KeyGuard key;
    auto transport = std::make_shared<ScriptedTransport>(
        std::vector<HttpResponse>{{401, "no"}, {200, completion_body("never reached")}});
    ChatClient client(test_config(), transport);
    CHECK_THROWS_WITH_AS(client.chat_complete("s", "u"), doctest::Contains("authentication"),
                         ProviderError);
    CHECK(transport->calls_ == 1);
}

TEST_CASE("exhausted retries raise after max_retries+1 attempts") {
    KeyGuard key;
    set_retry_sleep_hook([](std::size_t) {});
    auto transport = std::make_shared<ScriptedTransport>(
        std::vector<HttpResponse>{{500, "a"}, {500, "b"}, {500, "c"}, {500, "d"}});
    ChatClient client(test_config(), transport);
    CHECK_THROWS_AS(client.chat_complete("s", "u"), ProviderError);
    CHECK(transport->calls_ == 4);
    set_retry_sleep_hook(nullptr);
}

TEST_CASE("missing api key fails before any network call") {
    unsetenv("CEFR_TEST_KEY");
    auto transport = std::make_shared<ScriptedTransport>(std::vector<HttpResponse>{});
    ChatClient client(test_config(), transport);
    CHECK_THROWS_WITH_AS(client.chat_complete("s", "u"), doctest::Contains("CEFR_TEST_KEY"),
                         ProviderError);
    CHECK(transport->calls_ == 0);
}

TEST_CASE("malformed completion body") {
    KeyGuard key;
    auto transport = std::make_shared<ScriptedTransport>(
        std::vector<HttpResponse>{{200, "{\"choices\":[]}"}});
    ChatClient client(test_config(), transport);
    CHECK_THROWS_AS(client.chat_complete("s", "u"), ProviderError);
}

TEST_CASE("remote embedder parses and validates dimensions") {
    KeyGuard key;
    const std::string body =
        json{{"data", {{{"embedding", {0.6, 0.8, 0.0, 0.0}}}}}}.dump();
    {
        auto transport = std::make_shared<ScriptedTransport>(
            std::vector<HttpResponse>{{200, body}});
        RemoteEmbedder embedder(test_config(), transport, 4);
        const EmbeddingVector v = embedder.embed("bonjour");
        CHECK(v.dim() == 4);
        CHECK(v.values[0] == doctest::Approx(0.6));
        CHECK(transport->last_path_ == "/v1/embeddings");
    }
    {
        auto transport = std::make_shared<ScriptedTransport>(
            std::vector<HttpResponse>{{200, body}});
        RemoteEmbedder embedder(test_config(), transport, 8);
        CHECK_THROWS_WITH_AS(embedder.embed("bonjour"), doctest::Contains("dimension"),
                             ProviderError);
    }
}

TEST_CASE("recording transport counts calls and blocks when empty") {
    RecordingTransport recorder;
    CHECK(recorder.calls() == 0);
    CHECK_THROWS_AS(recorder.post("u", "p", {}, "b"), ProviderError);
    CHECK(recorder.calls() == 1);
}

TEST_CASE("cosine hand values") {
    CHECK(cosine({{1, 0}}, {{1, 0}}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cosine({{1, 0}}, {{0, 1}}) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(cosine({{1, 0}}, {{1, 1}}) == doctest::Approx(0.70710678).epsilon(1e-8));
    CHECK_THROWS_AS(cosine({{1, 0}}, {{1, 0, 0}}), DataError);
    CHECK_THROWS_AS(cosine({{0, 0}}, {{1, 0}}), DataError);
}

TEST_CASE("cosine symmetry, scale invariance, boundedness over random pairs") {
    std::mt19937 rng(77);
    auto unit = [&] { return static_cast<double>(rng()) / rng.max() * 2.0 - 1.0; };
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t dim = 2 + rng() % 12;
        EmbeddingVector u, v;
        for (std::size_t i = 0; i < dim; ++i) {
            u.values.push_back(unit());
            v.values.push_back(unit());
        }
        bool u_zero = true, v_zero = true;
        for (double x : u.values) u_zero = u_zero && x == 0.0;
        for (double x : v.values) v_zero = v_zero && x == 0.0;
        if (u_zero || v_zero) continue;

        const double c = cosine(u, v);
        CHECK(c >= -1.0);
        CHECK(c <= 1.0);
        CHECK(cosine(v, u) == doctest::Approx(c).epsilon(1e-9));

        const double alpha = 0.01 + static_cast<double>(rng() % 1000) / 10.0;
        EmbeddingVector scaled = u;
        for (double& x : scaled.values) x *= alpha;
        CHECK(cosine(scaled, v) == doctest::Approx(c).epsilon(1e-9));
    }
}

TEST_CASE("mock_embed determinism and unit norm") {
    const EmbeddingVector a = mock_embed("bonjour tout le monde", 64);
    const EmbeddingVector b = mock_embed("bonjour tout le monde", 64);
    CHECK(a.values == b.values);
    double norm = 0.0;
    for (double x : a.values) norm += x * x;
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(cosine(a, b) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("mock_embed disjoint trigrams give cosine 0") {
    // disjoint alphabets, no shared trigram; dim large enough to avoid collisions
    const EmbeddingVector a = mock_embed("aaaa", 4096);
    const EmbeddingVector b = mock_embed("zzzz", 4096);
    CHECK(cosine(a, b) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("mock_embed short text falls back to unigrams") {
    const EmbeddingVector a = mock_embed("ab", 64);
    double norm = 0.0;
    for (double x : a.values) norm += x * x;
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-9));
    // shares the 'a' unigram with "a", so similarity is positive
    CHECK(cosine(a, mock_embed("a", 64)) > 0.0);
    CHECK_THROWS_AS(mock_embed("abc", 4), UsageError);
}
