#include "hare/model_client.hpp"

#include <netdb.h>
#include <signal.h>
#include <string.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <map>
#include <stdexcept>

#include <json.hpp>

#include "hare/log.hpp"
#include "hare/tokenize.hpp"

namespace hare {

namespace {

void ignore_sigpipe() {
    static bool done = false;
    if (!done) {
        ::signal(SIGPIPE, SIG_IGN);
        done = true;
    }
}

bool write_all(int fd, const std::string& data) {
    size_t off = 0;
    while (off < data.size()) {
        ssize_t n = ::write(fd, data.data() + off, data.size() - off);
        if (n <= 0) {
            if (n < 0 && errno == EINTR) continue;
            return false;
        }
        off += static_cast<size_t>(n);
    }
    return true;
}

// Pulls one line out of buf, reading more from fd as needed.
bool read_line_fd(int fd, std::string& buf, std::string& line) {
    for (;;) {
        size_t pos = buf.find('\n');
        if (pos != std::string::npos) {
            line = buf.substr(0, pos);
            buf.erase(0, pos + 1);
            return true;
        }
        char chunk[4096];
        ssize_t n = ::read(fd, chunk, sizeof(chunk));
        if (n <= 0) {
            if (n < 0 && errno == EINTR) continue;
            return false;
        }
        buf.append(chunk, static_cast<size_t>(n));
    }
}

}  // namespace

ProcessTransport::ProcessTransport(const std::string& cmd) {
    ignore_sigpipe();
    int in_pipe[2], out_pipe[2];
    if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0)
        throw std::runtime_error("pipe failed for model command");
    pid_ = ::fork();
    if (pid_ < 0) throw std::runtime_error("fork failed for model command");
    if (pid_ == 0) {
        ::dup2(in_pipe[0], STDIN_FILENO);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::close(in_pipe[0]);
        ::close(in_pipe[1]);
        ::close(out_pipe[0]);
        ::close(out_pipe[1]);
        ::execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
}

ProcessTransport::~ProcessTransport() {
    if (to_child_ >= 0) ::close(to_child_);
    if (from_child_ >= 0) ::close(from_child_);
    if (pid_ > 0) {
        int status = 0;
        ::waitpid(pid_, &status, 0);
    }
}

bool ProcessTransport::send_line(const std::string& line) {
    return write_all(to_child_, line + "\n");
}

bool ProcessTransport::recv_line(std::string& line) {
    return read_line_fd(from_child_, buf_, line);
}

TcpTransport::TcpTransport(const std::string& host, int port) {
    ignore_sigpipe();
    struct addrinfo hints;
    ::memset(&hints, 0, sizeof(hints));
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    struct addrinfo* res = nullptr;
    std::string port_s = std::to_string(port);
    if (::getaddrinfo(host.c_str(), port_s.c_str(), &hints, &res) != 0 || !res)
        throw std::runtime_error("cannot resolve model host: " + host);
    fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd_ < 0 || ::connect(fd_, res->ai_addr, res->ai_addrlen) != 0) {
        ::freeaddrinfo(res);
        if (fd_ >= 0) ::close(fd_);
        throw std::runtime_error("cannot connect to model at " + host + ":" + port_s);
    }
    ::freeaddrinfo(res);
}

TcpTransport::~TcpTransport() {
    if (fd_ >= 0) ::close(fd_);
}

bool TcpTransport::send_line(const std::string& line) {
    return write_all(fd_, line + "\n");
}

bool TcpTransport::recv_line(std::string& line) {
    return read_line_fd(fd_, buf_, line);
}

ModelClient::ModelClient(std::unique_ptr<Transport> transport, int max_retries)
    : transport_(std::move(transport)), max_retries_(max_retries) {}

// Sends one request per input and collects responses matched by id.
// Returns the raw payload field per input ("score" as decimal text, or the
// refinement text). Model-side error responses set error_flag and stop.
std::vector<std::string> ModelClient::exchange(const std::string& op,
                                               const std::vector<std::string>& inputs,
                                               bool* error_flag, std::string* error_msg) {
    std::vector<std::string> results(inputs.size());
    std::vector<bool> done(inputs.size(), false);
    size_t remaining = inputs.size();

    for (int attempt = 0; attempt <= max_retries_ && remaining > 0; ++attempt) {
        std::map<long long, size_t> pending;
        bool transport_ok = true;
        for (size_t i = 0; i < inputs.size() && transport_ok; ++i) {
            if (done[i]) continue;
            nlohmann::json req;
            req["id"] = next_id_;
            req["op"] = op;
            req["input"] = inputs[i];
            pending[next_id_] = i;
            ++next_id_;
            transport_ok = transport_->send_line(req.dump());
        }
        while (transport_ok && !pending.empty()) {
            std::string line;
            if (!transport_->recv_line(line)) {
                transport_ok = false;
                break;
            }
            nlohmann::json resp;
            try {
                resp = nlohmann::json::parse(line);
            } catch (const nlohmann::json::parse_error&) {
                throw std::runtime_error("malformed model response: " + line);
            }
            if (!resp.contains("id") || !resp["id"].is_number_integer())
                throw std::runtime_error("malformed model response: " + line);
            auto it = pending.find(resp["id"].get<long long>());
            if (it == pending.end()) continue;  // stale duplicate from a retry
            size_t slot = it->second;
            pending.erase(it);
            if (resp.contains("error")) {
                if (error_flag) *error_flag = true;
                if (error_msg) *error_msg = resp["error"].is_string()
                                                ? resp["error"].get<std::string>()
                                                : resp["error"].dump();
                return results;
            }
            if (resp.contains("score")) {
                if (!resp["score"].is_number())
                    throw std::runtime_error("malformed model response: " + line);
                results[slot] = resp["score"].dump();
            } else if (resp.contains("refinement")) {
                results[slot] = resp["refinement"].is_string()
                                    ? resp["refinement"].get<std::string>()
                                    : resp["refinement"].dump();
            } else {
                throw std::runtime_error("malformed model response: " + line);
            }
            done[slot] = true;
            --remaining;
        }
        if (remaining > 0 && attempt < max_retries_)
            HARE_WARN("model transport failure, retrying (%zu requests left)", remaining);
    }
    if (remaining > 0)
        throw std::runtime_error("model transport failed after " +
                                 std::to_string(max_retries_ + 1) + " attempts");
    return results;
}

std::vector<double> ModelClient::score(const std::vector<std::string>& inputs) {
    bool err = false;
    std::string msg;
    auto raw = exchange("score", inputs, &err, &msg);
    if (err) throw std::runtime_error("model error: " + msg);
    std::vector<double> out;
    out.reserve(raw.size());
    for (const auto& r : raw) out.push_back(std::stod(r));
    return out;
}

std::optional<std::string> ModelClient::expand(const std::string& input) {
    bool err = false;
    std::string msg;
    auto raw = exchange("expand", {input}, &err, &msg);
    if (err) throw std::runtime_error("model error: " + msg);
    if (raw.empty() || raw[0].empty()) return std::nullopt;
    return raw[0];
}

std::string serialize_score_input(const std::string& query, const std::string& doc_text,
                                  int max_doc_tokens) {
    return "query: " + query +
           " document: " + truncate_whitespace_tokens(doc_text, max_doc_tokens);
}

}  // namespace hare
