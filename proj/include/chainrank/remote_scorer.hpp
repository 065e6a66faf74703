#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "chainrank/scorer.hpp"

namespace chainrank {

// Wire protocol for plugging in an externally owned scorer: one JSON object
// per line, request {"id": n, "prefix": string, "candidates": [string,...]}
// answered by {"id": n, "scores": [real,...]}. Responses may arrive out of
// order but must carry the matching id. A STOP candidate is the empty
// string. Requests on one connection are serialized.
class RemoteScorer : public Scorer {
public:
    // command is run under /bin/sh with the protocol on stdin/stdout.
    static std::unique_ptr<RemoteScorer> spawn(const Corpus& corpus, const std::string& command);
    static std::unique_ptr<RemoteScorer> connect_tcp(const Corpus& corpus,
                                                     const std::string& host, int port);

    ~RemoteScorer() override;
    std::vector<double> score_batch(std::span<const ScorerInput> inputs) const override;

protected:
    double do_score(const ScorerInput& input) const override;

private:
    struct Transport;
    RemoteScorer(const Corpus& corpus, std::unique_ptr<Transport> transport);

    std::vector<double> request(const std::string& prefix,
                                const std::vector<std::string>& candidates) const;

    const Corpus* corpus_;
    std::unique_ptr<Transport> transport_;
    mutable std::mutex mutex_;
    mutable std::uint64_t next_id_ = 0;
    mutable std::unordered_map<std::uint64_t, std::vector<double>> pending_;
};

// Encoded prefix segment sent over the wire: the sample encoding with an
// empty candidate slot stripped of the trailing separators.
std::string encode_prefix(const Corpus& corpus, const Query& query,
                          std::span<const std::uint32_t> prefix);

}  // namespace chainrank
