// Toy external scorer speaking the line-JSON protocol on stdio. Scores each
// candidate by its text length; the STOP candidate (empty string) gets the
// prefix length modulo 7. With --shuffle, each real response is preceded by
// a decoy response carrying an unrelated id, exercising the client's
// out-of-order handling.
#include <iostream>
#include <string>
#include <vector>

#include "json.hpp"

using nlohmann::json;

static json respond(const json& req) {
    std::string prefix = req.at("prefix").get<std::string>();
    std::vector<double> scores;
    for (const auto& c : req.at("candidates")) {
        std::string text = c.get<std::string>();
        scores.push_back(text.empty() ? static_cast<double>(prefix.size() % 7)
                                      : static_cast<double>(text.size()));
    }
    return json{{"id", req.at("id")}, {"scores", scores}};
}

int main(int argc, char** argv) {
    bool shuffle = argc > 1 && std::string(argv[1]) == "--shuffle";
    std::string line;
    while (std::getline(std::cin, line)) {
        if (line.empty()) continue;
        json req = json::parse(line);
        if (shuffle) {
            json decoy{{"id", req.at("id").get<std::uint64_t>() + 1000000},
                       {"scores", {0.0}}};
            std::cout << decoy.dump() << "\n";
        }
        std::cout << respond(req).dump() << "\n" << std::flush;
    }
    return 0;
}
