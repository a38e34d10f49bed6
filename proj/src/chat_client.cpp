#include "criticgate/chat_client.hpp"

#include "criticgate/serialize.hpp"

#include <httplib.h>

#include <condition_variable>
#include <cstdlib>
#include <mutex>

namespace criticgate {

namespace {

// splits "http://host:port" + path into (scheme://host:port, path-prefix)
std::pair<std::string, std::string> split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint URL without scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

class HttplibTransport final : public HttpTransport {
public:
    HttpResponse post(const std::string& url, const std::vector<Header>& headers,
                      const std::string& body) override {
        const auto [origin, path] = split_url(url);
        httplib::Client client(origin);
        client.set_connection_timeout(30, 0);
        client.set_read_timeout(120, 0);
        httplib::Headers hdrs;
        for (const auto& [key, value] : headers) hdrs.emplace(key, value);
        auto result = client.Post(path, hdrs, body, "application/json");
        if (!result) throw TransportError(httplib::to_string(result.error()));
        return HttpResponse{result->status, result->body};
    }
};

}  // namespace

std::unique_ptr<HttpTransport> make_httplib_transport() {
    return std::make_unique<HttplibTransport>();
}

RecordedTransport::RecordedTransport(std::vector<std::string> exchange_files) {
    for (const auto& path : exchange_files) {
        Json doc;
        try {
            doc = Json::parse(read_text_file(path));
        } catch (const std::exception& e) {
            throw ParseError(path, e.what());
        }
        if (!doc.contains("request") || !doc.contains("response"))
            throw ParseError(path, "exchange file needs 'request' and 'response'");
        exchanges_.push_back(std::move(doc));
    }
}

HttpResponse RecordedTransport::post(const std::string&, const std::vector<Header>&,
                                     const std::string& body) {
    if (next_ >= exchanges_.size())
        throw TransportError("no recorded exchange left for this request");
    const Json& exchange = exchanges_[next_++];
    const Json recorded = exchange.at("request");
    const Json actual = Json::parse(body);
    if (recorded.contains("model") && recorded.at("model") != actual.value("model", Json()))
        throw TransportError("recorded exchange model mismatch");
    if (recorded.contains("messages") &&
        recorded.at("messages") != actual.value("messages", Json()))
        throw TransportError("recorded exchange messages mismatch");
    const Json& response = exchange.at("response");
    HttpResponse out;
    out.status = response.value("status", 200);
    const Json& payload = response.at("body");
    out.body = payload.is_string() ? payload.get<std::string>() : payload.dump();
    return out;
}

std::string chat_complete(const EndpointConfig& config, HttpTransport& transport,
                          const std::vector<ChatMessage>& messages) {
    if (config.base_url.empty()) throw ConfigError("endpoint base_url not set");
    std::string api_key = config.api_key;
    if (api_key.empty()) {
        const char* env = std::getenv(config.api_key_env.c_str());
        if (env) api_key = env;
    }
    if (api_key.empty())
        throw ConfigError("credential missing: set " + config.api_key_env);

    Json body{{"model", config.model}, {"messages", Json::array()},
              {"temperature", config.temperature}};
    for (const auto& m : messages)
        body["messages"].push_back(Json{{"role", m.role}, {"content", m.content}});

    const std::vector<Header> headers{{"Authorization", "Bearer " + api_key}};
    const HttpResponse response =
        transport.post(config.base_url + config.path, headers, body.dump());

    if (response.status < 200 || response.status >= 300)
        throw StatusError(response.status, response.body);

    Json parsed;
    try {
        parsed = Json::parse(response.body);
    } catch (const std::exception&) {
        throw SchemaError("response body (not JSON)");
    }
    if (!parsed.contains("choices") || !parsed["choices"].is_array())
        throw SchemaError("choices");
    if (parsed["choices"].empty()) throw SchemaError("choices (empty)");
    const Json& first = parsed["choices"][0];
    if (!first.contains("message")) throw SchemaError("choices[0].message");
    const Json& message = first["message"];
    if (!message.contains("content") || !message["content"].is_string())
        throw SchemaError("choices[0].message.content");
    return message["content"].get<std::string>();
}

// Counting semaphore bounding concurrent in-flight requests.
struct EndpointBackend::Limiter {
    std::mutex mutex;
    std::condition_variable cv;
    int available = 0;

    explicit Limiter(int slots) : available(slots) {}

    void acquire() {
        std::unique_lock<std::mutex> lock(mutex);
        cv.wait(lock, [&] { return available > 0; });
        --available;
    }
    void release() {
        {
            std::lock_guard<std::mutex> lock(mutex);
            ++available;
        }
        cv.notify_one();
    }
};

EndpointBackend::EndpointBackend(EndpointConfig config, std::shared_ptr<HttpTransport> transport)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      limiter_(std::make_shared<Limiter>(config_.max_in_flight > 0 ? config_.max_in_flight : 1)) {}

std::string EndpointBackend::complete(const BackendRequest& request) {
    std::vector<ChatMessage> messages;
    messages.push_back({"system", request.system_prompt});
    messages.push_back({"user", request.user_prompt});
    if (!request.guidance.empty()) {
        messages.push_back({"assistant", request.proposal_text});
        messages.push_back({"user", "Critic feedback:\n" + request.guidance +
                                        "\nRevise your action accordingly and reply with the "
                                        "action only."});
    }
    limiter_->acquire();
    try {
        std::string out = chat_complete(config_, *transport_, messages);
        limiter_->release();
        return out;
    } catch (...) {
        limiter_->release();
        throw;
    }
}

}  // namespace criticgate
