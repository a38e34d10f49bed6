#pragma once

#include "criticgate/backends.hpp"
#include "criticgate/model.hpp"

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace criticgate {

inline constexpr char kApiKeyEnvVar[] = "CRITIC_GATE_API_KEY";

struct ChatMessage {
    std::string role;  // system | user | assistant
    std::string content;
};

struct EndpointConfig {
    std::string base_url;  // e.g. http://127.0.0.1:8080
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string api_key;  // taken from CRITIC_GATE_API_KEY when empty
    std::string api_key_env = kApiKeyEnvVar;
    double temperature = 1.0;
    int max_in_flight = 4;  // concurrent request bound for the backend wrapper
};

// Transport failed before an HTTP status existed (DNS, refused, timeout).
struct TransportError : Error {
    explicit TransportError(const std::string& msg) : Error("transport: " + msg) {}
};

// The server answered with a non-2xx status.
struct StatusError : Error {
    StatusError(int status, const std::string& body)
        : Error("http status " + std::to_string(status) + ": " + body), status(status) {}
    int status = 0;
};

// The 2xx body did not match the chat-completions schema; names the location.
struct SchemaError : Error {
    explicit SchemaError(const std::string& location)
        : Error("schema mismatch at " + location), location(location) {}
    std::string location;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

using Header = std::pair<std::string, std::string>;

class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse post(const std::string& url, const std::vector<Header>& headers,
                              const std::string& body) = 0;
};

// Real transport over cpp-httplib. One-shot: transport errors are never
// retried.
std::unique_ptr<HttpTransport> make_httplib_transport();

// Replays recorded exchanges from disk: each file holds one paired
// request/response document {"request": {...}, "response": {"status", "body"}}.
// Requests are matched against the recording (model + messages) in order.
class RecordedTransport final : public HttpTransport {
public:
    explicit RecordedTransport(std::vector<std::string> exchange_files);

    HttpResponse post(const std::string& url, const std::vector<Header>& headers,
                      const std::string& body) override;

    std::size_t remaining() const { return exchanges_.size() - next_; }

private:
    std::vector<Json> exchanges_;
    std::size_t next_ = 0;
};

// One chat completion: builds the wire-protocol request (model, messages,
// temperature), posts it and extracts choices[0].message.content. Throws
// ConfigError before any network activity when the credential is missing.
std::string chat_complete(const EndpointConfig& config, HttpTransport& transport,
                          const std::vector<ChatMessage>& messages);

// ModelBackend over a chat-completions endpoint. Revision requests append the
// prior proposal and the critic feedback as extra turns. Safe to share across
// episodes; in-flight requests are bounded by config.max_in_flight.
class EndpointBackend final : public ModelBackend {
public:
    EndpointBackend(EndpointConfig config, std::shared_ptr<HttpTransport> transport);

    std::string identity() const override { return "endpoint:" + config_.model; }
    std::string complete(const BackendRequest& request) override;

private:
    EndpointConfig config_;
    std::shared_ptr<HttpTransport> transport_;
    struct Limiter;
    std::shared_ptr<Limiter> limiter_;
};

}  // namespace criticgate
