#include "chainrank/remote_scorer.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstring>
#include <stdexcept>

#include "json.hpp"

using nlohmann::json;

namespace chainrank {

struct RemoteScorer::Transport {
    int read_fd = -1;
    int write_fd = -1;
    pid_t child = -1;
    std::string buffer;

    ~Transport() {
        if (write_fd >= 0) ::close(write_fd);
        if (read_fd >= 0 && read_fd != write_fd) ::close(read_fd);
        if (child > 0) {
            int status = 0;
            ::waitpid(child, &status, 0);
        }
    }

    void write_line(const std::string& line) {
        std::string data = line + '\n';
        std::size_t off = 0;
        while (off < data.size()) {
            ssize_t n = ::write(write_fd, data.data() + off, data.size() - off);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw std::runtime_error("external scorer unreachable: write failed");
            }
            off += static_cast<std::size_t>(n);
        }
    }

    std::string read_line() {
        while (true) {
            std::size_t nl = buffer.find('\n');
            if (nl != std::string::npos) {
                std::string line = buffer.substr(0, nl);
                buffer.erase(0, nl + 1);
                return line;
            }
            char chunk[4096];
            ssize_t n = ::read(read_fd, chunk, sizeof(chunk));
            if (n < 0) {
                if (errno == EINTR) continue;
                throw std::runtime_error("external scorer unreachable: read failed");
            }
            if (n == 0) throw std::runtime_error("external scorer closed the connection");
            buffer.append(chunk, static_cast<std::size_t>(n));
        }
    }
};

std::string encode_prefix(const Corpus& corpus, const Query& query,
                          std::span<const std::uint32_t> prefix) {
    ScorerInput input;
    input.query = &query;
    input.prefix.assign(prefix.begin(), prefix.end());
    std::string s = encode(corpus, input);
    // Strip the empty candidate slot left by the STOP encoding.
    constexpr std::string_view kEmptyTail = " [SEP]  [SEP]";
    if (s.ends_with(kEmptyTail)) s.resize(s.size() - kEmptyTail.size());
    return s;
}

RemoteScorer::RemoteScorer(const Corpus& corpus, std::unique_ptr<Transport> transport)
    : corpus_(&corpus), transport_(std::move(transport)) {}

RemoteScorer::~RemoteScorer() = default;

std::unique_ptr<RemoteScorer> RemoteScorer::spawn(const Corpus& corpus,
                                                  const std::string& command) {
    int to_child[2], from_child[2];
    if (::pipe(to_child) != 0 || ::pipe(from_child) != 0)
        throw std::runtime_error("cannot create pipes for external scorer");
    pid_t pid = ::fork();
    if (pid < 0) throw std::runtime_error("cannot fork external scorer");
    if (pid == 0) {
        ::dup2(to_child[0], STDIN_FILENO);
        ::dup2(from_child[1], STDOUT_FILENO);
        ::close(to_child[0]);
        ::close(to_child[1]);
        ::close(from_child[0]);
        ::close(from_child[1]);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    auto transport = std::make_unique<Transport>();
    transport->read_fd = from_child[0];
    transport->write_fd = to_child[1];
    transport->child = pid;
    ::signal(SIGPIPE, SIG_IGN);
    return std::unique_ptr<RemoteScorer>(new RemoteScorer(corpus, std::move(transport)));
}

std::unique_ptr<RemoteScorer> RemoteScorer::connect_tcp(const Corpus& corpus,
                                                        const std::string& host, int port) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    std::string service = std::to_string(port);
    if (::getaddrinfo(host.c_str(), service.c_str(), &hints, &res) != 0 || res == nullptr)
        throw std::runtime_error("external scorer unreachable: cannot resolve " + host);
    int fd = -1;
    for (addrinfo* p = res; p != nullptr; p = p->ai_next) {
        fd = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, p->ai_addr, p->ai_addrlen) == 0) break;
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0)
        throw std::runtime_error("external scorer unreachable: cannot connect to " + host + ":" +
                                 service);
    auto transport = std::make_unique<Transport>();
    transport->read_fd = fd;
    transport->write_fd = fd;
    ::signal(SIGPIPE, SIG_IGN);
    return std::unique_ptr<RemoteScorer>(new RemoteScorer(corpus, std::move(transport)));
}

std::vector<double> RemoteScorer::request(const std::string& prefix,
                                          const std::vector<std::string>& candidates) const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::uint64_t id = next_id_++;
    json req{{"id", id}, {"prefix", prefix}, {"candidates", candidates}};
    transport_->write_line(req.dump());
    while (true) {
        auto it = pending_.find(id);
        if (it != pending_.end()) {
            auto scores = std::move(it->second);
            pending_.erase(it);
            if (scores.size() != candidates.size())
                throw std::runtime_error("external scorer returned wrong score count");
            return scores;
        }
        json resp = json::parse(transport_->read_line());
        pending_[resp.at("id").get<std::uint64_t>()] =
            resp.at("scores").get<std::vector<double>>();
    }
}

double RemoteScorer::do_score(const ScorerInput& input) const {
    std::string cand = input.is_stop() ? "" : corpus_->facts()[*input.candidate].text;
    return request(encode_prefix(*corpus_, *input.query, input.prefix), {cand})[0];
}

std::vector<double> RemoteScorer::score_batch(std::span<const ScorerInput> inputs) const {
    if (inputs.empty()) return {};
    passes_.fetch_add(inputs.size(), std::memory_order_relaxed);

    // Group runs that share a (query, prefix) into one request.
    std::vector<double> out(inputs.size());
    std::size_t i = 0;
    while (i < inputs.size()) {
        std::size_t j = i + 1;
        while (j < inputs.size() && inputs[j].query == inputs[i].query &&
               inputs[j].prefix == inputs[i].prefix)
            j++;
        std::vector<std::string> candidates;
        candidates.reserve(j - i);
        for (std::size_t l = i; l < j; l++)
            candidates.push_back(inputs[l].is_stop() ? ""
                                                     : corpus_->facts()[*inputs[l].candidate].text);
        auto scores = request(encode_prefix(*corpus_, *inputs[i].query, inputs[i].prefix),
                              candidates);
        std::copy(scores.begin(), scores.end(), out.begin() + static_cast<std::ptrdiff_t>(i));
        i = j;
    }
    return out;
}

}  // namespace chainrank
