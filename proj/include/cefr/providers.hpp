#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace cefr {

struct ProviderConfig {
    std::string base_url;       // e.g. "https://api.example.com"
    std::string model_id;
    std::string api_key_env;    // environment variable holding the key
    std::size_t timeout_ms = 30000;
    std::size_t max_retries = 3;
    double temperature = 0.0;
    std::size_t backoff_initial_ms = 500;  // doubles per attempt, jittered
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

// The one seam between providers and the network. Tests inject scripted
// or recording transports here; mock providers never touch a transport.
class Transport {
public:
    virtual ~Transport() = default;
    // Throws ProviderError on transport-level failure (connect/timeout).
    virtual HttpResponse post(const std::string& url, const std::string& path,
                              const std::map<std::string, std::string>& headers,
                              const std::string& body) = 0;
};

// Real HTTP transport backed by cpp-httplib.
std::shared_ptr<Transport> make_http_transport();

// Counts calls and delegates (or fails when no inner transport is set).
// Used to assert that mock pipelines never reach the network.
class RecordingTransport : public Transport {
public:
    explicit RecordingTransport(std::shared_ptr<Transport> inner = nullptr)
        : inner_(std::move(inner)) {}
    HttpResponse post(const std::string& url, const std::string& path,
                      const std::map<std::string, std::string>& headers,
                      const std::string& body) override;
    std::size_t calls() const { return calls_; }

private:
    std::shared_ptr<Transport> inner_;
    std::size_t calls_ = 0;
};

// Chat-completions style client: {model, messages, temperature} in,
// choices[0].message.content out. Retries transient failures (5xx/429 and
// transport errors) with exponential backoff; auth failures never retry.
class ChatClient {
public:
    ChatClient(ProviderConfig config, std::shared_ptr<Transport> transport);

    std::string chat_complete(const std::string& system_prompt,
                              const std::string& user_prompt) const;
    const ProviderConfig& config() const { return config_; }

private:
    HttpResponse post_with_retry(const std::string& path, const std::string& body) const;

    ProviderConfig config_;
    std::shared_ptr<Transport> transport_;

    friend class RemoteEmbedder;
};

struct EmbeddingVector {
    std::vector<double> values;
    std::size_t dim() const { return values.size(); }
};

// dot(u,v)/(|u||v|), clamped to [-1,1]. Throws on dim mismatch or zero vector.
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

// Deterministic offline embedder: hashed character-trigram bag projected to
// `dim` buckets, L2-normalized. Texts shorter than 3 code points fall back
// to character unigrams.
EmbeddingVector mock_embed(const std::string& text, std::size_t dim);

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual EmbeddingVector embed(const std::string& text) const = 0;
    virtual std::size_t dim() const = 0;
};

class MockEmbedder : public Embedder {
public:
    explicit MockEmbedder(std::size_t dim = 256);
    EmbeddingVector embed(const std::string& text) const override;
    std::size_t dim() const override { return dim_; }

private:
    std::size_t dim_;
};

// Remote embeddings endpoint: {model, input} -> {data:[{embedding:[...]}]}.
class RemoteEmbedder : public Embedder {
public:
    RemoteEmbedder(ProviderConfig config, std::shared_ptr<Transport> transport,
                   std::size_t expected_dim);
    EmbeddingVector embed(const std::string& text) const override;
    std::size_t dim() const override { return expected_dim_; }

private:
    ChatClient client_;  // reuses config/retry plumbing
    std::size_t expected_dim_;
};

// Chat backend seam so simplifiers/classifiers can run against mocks.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string complete(const std::string& system_prompt,
                                 const std::string& user_prompt) const = 0;
};

class RemoteChatBackend : public ChatBackend {
public:
    RemoteChatBackend(ProviderConfig config, std::shared_ptr<Transport> transport)
        : client_(std::move(config), std::move(transport)) {}
    std::string complete(const std::string& system_prompt,
                         const std::string& user_prompt) const override {
        return client_.chat_complete(system_prompt, user_prompt);
    }

private:
    ChatClient client_;
};

// Returns the user prompt verbatim; handy for template wiring tests.
class EchoChatBackend : public ChatBackend {
public:
    std::string complete(const std::string&, const std::string& user_prompt) const override {
        return user_prompt;
    }
};

// Sleep hook for retry backoff; tests swap in a no-op recorder.
using SleepFn = std::function<void(std::size_t /*ms*/)>;
void set_retry_sleep_hook(SleepFn fn);  // nullptr restores real sleeping

}  // namespace cefr
