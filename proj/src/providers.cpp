#include "cefr/providers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cefr/errors.hpp"
#include "cefr/utf8.hpp"

namespace cefr {

using nlohmann::json;

namespace {

SleepFn g_sleep_hook;

void backoff_sleep(std::size_t ms) {
    if (g_sleep_hook) {
        g_sleep_hook(ms);
    } else {
        std::this_thread::sleep_for(std::chrono::milliseconds(ms));
    }
}

std::size_t backoff_delay_ms(std::size_t initial_ms, std::size_t attempt) {
    const std::size_t base = initial_ms << std::min<std::size_t>(attempt, 16);
    if (base == 0) return 0;
    std::mt19937_64 jitter_rng(attempt + 1);
    return base + jitter_rng() % (base / 2 + 1);
}

class HttplibTransport : public Transport {
public:
    HttpResponse post(const std::string& url, const std::string& path,
                      const std::map<std::string, std::string>& headers,
                      const std::string& body) override {
        httplib::Client client(url);
        auto timeout_it = headers.find("X-Timeout-Ms");
        if (timeout_it != headers.end()) {
            const auto ms = static_cast<time_t>(std::stoll(timeout_it->second));
            client.set_connection_timeout(ms / 1000, (ms % 1000) * 1000);
            client.set_read_timeout(ms / 1000, (ms % 1000) * 1000);
        }
        httplib::Headers h;
        for (const auto& [k, v] : headers) {
            if (k != "X-Timeout-Ms") h.emplace(k, v);
        }
        auto result = client.Post(path, h, body, "application/json");
        if (!result) {
            throw ProviderError("transport failure: " + httplib::to_string(result.error()));
        }
        return {result->status, result->body};
    }
};

}  // namespace

void set_retry_sleep_hook(SleepFn fn) { g_sleep_hook = std::move(fn); }

std::shared_ptr<Transport> make_http_transport() {
    return std::make_shared<HttplibTransport>();
}

HttpResponse RecordingTransport::post(const std::string& url, const std::string& path,
                                      const std::map<std::string, std::string>& headers,
                                      const std::string& body) {
    ++calls_;
    if (!inner_) throw ProviderError("network access attempted in offline mode");
    return inner_->post(url, path, headers, body);
}

ChatClient::ChatClient(ProviderConfig config, std::shared_ptr<Transport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
    if (config_.timeout_ms == 0) throw UsageError("timeout_ms must be > 0");
    if (!transport_) throw UsageError("chat client needs a transport");
}

HttpResponse ChatClient::post_with_retry(const std::string& path,
                                         const std::string& body) const {
    std::map<std::string, std::string> headers{
        {"X-Timeout-Ms", std::to_string(config_.timeout_ms)}};
    if (!config_.api_key_env.empty()) {
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (key == nullptr || *key == '\0') {
            throw ProviderError("API key environment variable '" + config_.api_key_env +
                                "' is not set");
        }
        headers["Authorization"] = std::string("Bearer ") + key;
    }

    std::string last_error;
    for (std::size_t attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            backoff_sleep(backoff_delay_ms(config_.backoff_initial_ms, attempt - 1));
        }
        HttpResponse response;
        try {
            response = transport_->post(config_.base_url, path, headers, body);
        } catch (const ProviderError& e) {
            last_error = e.what();
            continue;  // transport errors are transient
        }
        if (response.status == 200) return response;
        if (response.status == 401 || response.status == 403) {
            throw ProviderError("authentication failed (HTTP " +
                                std::to_string(response.status) + ")");
        }
        if (response.status == 429 || response.status >= 500) {
            last_error = "HTTP " + std::to_string(response.status);
            continue;
        }
        throw ProviderError("request failed: HTTP " + std::to_string(response.status) +
                            ": " + response.body);
    }
    throw ProviderError("request failed after " + std::to_string(config_.max_retries + 1) +
                        " attempts (" + last_error + ")");
}

std::string ChatClient::chat_complete(const std::string& system_prompt,
                                      const std::string& user_prompt) const {
    if (user_prompt.empty()) throw UsageError("empty user prompt");
    json messages = json::array();
    if (!system_prompt.empty()) {
        messages.push_back({{"role", "system"}, {"content", system_prompt}});
    }
    messages.push_back({{"role", "user"}, {"content", user_prompt}});
    const json body{{"model", config_.model_id},
                    {"messages", messages},
                    {"temperature", config_.temperature}};
    const HttpResponse response = post_with_retry("/v1/chat/completions", body.dump());
    try {
        const json reply = json::parse(response.body);
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw ProviderError(std::string("malformed completion response: ") + e.what());
    }
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
    if (u.dim() != v.dim()) throw DataError("embedding dimension mismatch");
    if (u.dim() == 0) throw DataError("empty embedding vector");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        dot += u.values[i] * v.values[i];
        nu += u.values[i] * u.values[i];
        nv += v.values[i] * v.values[i];
    }
    if (nu == 0.0 || nv == 0.0) throw DataError("cosine of a zero vector");
    const double c = dot / (std::sqrt(nu) * std::sqrt(nv));
    return std::clamp(c, -1.0, 1.0);
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

EmbeddingVector mock_embed(const std::string& text, std::size_t dim) {
    if (dim < 8) throw UsageError("mock embedding dimension must be >= 8");
    const std::vector<char32_t> cps = utf8::decode(text);
    std::vector<double> buckets(dim, 0.0);
    const std::size_t gram = cps.size() >= 3 ? 3 : 1;
    if (cps.empty()) {
        buckets[0] = 1.0;
        return {std::move(buckets)};
    }
    for (std::size_t i = 0; i + gram <= cps.size(); ++i) {
        std::string key;
        for (std::size_t k = 0; k < gram; ++k) utf8::append(key, cps[i + k]);
        buckets[fnv1a(key) % dim] += 1.0;
    }
    double norm = 0.0;
    for (double b : buckets) norm += b * b;
    norm = std::sqrt(norm);
    for (double& b : buckets) b /= norm;
    return {std::move(buckets)};
}

MockEmbedder::MockEmbedder(std::size_t dim) : dim_(dim) {
    if (dim < 8) throw UsageError("mock embedding dimension must be >= 8");
}

EmbeddingVector MockEmbedder::embed(const std::string& text) const {
    return mock_embed(text, dim_);
}

RemoteEmbedder::RemoteEmbedder(ProviderConfig config, std::shared_ptr<Transport> transport,
                               std::size_t expected_dim)
    : client_(std::move(config), std::move(transport)), expected_dim_(expected_dim) {}

EmbeddingVector RemoteEmbedder::embed(const std::string& text) const {
    if (text.empty()) throw UsageError("cannot embed empty text");
    const json body{{"model", client_.config_.model_id}, {"input", text}};
    const HttpResponse response = client_.post_with_retry("/v1/embeddings", body.dump());
    EmbeddingVector vec;
    try {
        const json reply = json::parse(response.body);
        vec.values = reply.at("data").at(0).at("embedding").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw ProviderError(std::string("malformed embedding response: ") + e.what());
    }
    if (expected_dim_ != 0 && vec.dim() != expected_dim_) {
        throw ProviderError("embedding dimension mismatch: expected " +
                            std::to_string(expected_dim_) + ", got " +
                            std::to_string(vec.dim()));
    }
    for (double v : vec.values) {
        if (!std::isfinite(v)) throw ProviderError("non-finite embedding value");
    }
    return vec;
}

}  // namespace cefr
