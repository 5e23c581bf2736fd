#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace hare {

// Line transport for the newline-delimited JSON model protocol.
class Transport {
public:
    virtual ~Transport() = default;
    virtual bool send_line(const std::string& line) = 0;
    virtual bool recv_line(std::string& line) = 0;
};

// Spawns `cmd` via /bin/sh and talks NDJSON over its stdin/stdout.
class ProcessTransport : public Transport {
public:
    explicit ProcessTransport(const std::string& cmd);
    ~ProcessTransport() override;
    bool send_line(const std::string& line) override;
    bool recv_line(std::string& line) override;

private:
    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buf_;
};

// Connects to host:port and talks the same protocol over the socket.
class TcpTransport : public Transport {
public:
    TcpTransport(const std::string& host, int port);
    ~TcpTransport() override;
    bool send_line(const std::string& line) override;
    bool recv_line(std::string& line) override;

private:
    int fd_ = -1;
    std::string buf_;
};

// Request:  {"id": n, "op": "score"|"expand", "input": text}
// Response: {"id": n, "score": x} | {"id": n, "refinement": text}
//           | {"id": n, "error": text}
// Responses may arrive out of order; they are matched by id. Transport
// failures are retried a bounded number of times, then surfaced as
// std::runtime_error. Malformed response lines carry the offending line.
class ModelClient {
public:
    explicit ModelClient(std::unique_ptr<Transport> transport, int max_retries = 2);

    // One request per input; results in input order. A model-side error
    // response throws, carrying the model's message.
    std::vector<double> score(const std::vector<std::string>& inputs);

    // Returns the model's refinement text; nullopt when the model answers
    // with an empty refinement (the stop signal).
    std::optional<std::string> expand(const std::string& input);

private:
    std::unique_ptr<Transport> transport_;
    int max_retries_;
    long long next_id_ = 1;

    std::vector<std::string> exchange(const std::string& op,
                                      const std::vector<std::string>& inputs,
                                      bool* error_flag, std::string* error_msg);
};

// "query: {query} document: {document}" with the document truncated to
// max_doc_tokens whitespace tokens.
std::string serialize_score_input(const std::string& query, const std::string& doc_text,
                                  int max_doc_tokens = 256);

}  // namespace hare
