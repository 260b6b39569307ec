#include "covihawkes/model_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <span>
#include <stdexcept>
#include <vector>

namespace covihawkes {

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(std::span<const unsigned char> bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= bytes.size(); i += 3) {
        const unsigned v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
        out += kAlphabet[v & 63];
    }
    const std::size_t rest = bytes.size() - i;
    if (rest == 1) {
        const unsigned v = bytes[i] << 16;
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += "==";
    } else if (rest == 2) {
        const unsigned v = (bytes[i] << 16) | (bytes[i + 1] << 8);
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

int decode_char(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    throw std::invalid_argument("invalid base64 character");
}

std::vector<unsigned char> base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) {
        throw std::invalid_argument("base64 payload length not a multiple of 4");
    }
    std::vector<unsigned char> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        const int pad = (text[i + 3] == '=') + (text[i + 2] == '=');
        unsigned v = 0;
        for (int k = 0; k < 4; ++k) {
            const char c = text[i + k];
            v = (v << 6) | (c == '=' ? 0u : static_cast<unsigned>(decode_char(c)));
        }
        out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
        if (pad < 2) out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
        if (pad < 1) out.push_back(static_cast<unsigned char>(v & 0xff));
    }
    return out;
}

std::string encode_doubles(std::span<const double> values) {
    std::vector<unsigned char> bytes(values.size() * 8);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto word = std::bit_cast<std::uint64_t>(values[i]);
        for (int b = 0; b < 8; ++b) {
            bytes[i * 8 + static_cast<std::size_t>(b)] =
                static_cast<unsigned char>((word >> (8 * b)) & 0xff);  // little-endian
        }
    }
    return base64_encode(bytes);
}

std::vector<double> decode_doubles(const std::string& text, std::size_t expected) {
    const std::vector<unsigned char> bytes = base64_decode(text);
    if (bytes.size() != expected * 8) {
        throw std::invalid_argument("parameter array has " + std::to_string(bytes.size() / 8) +
                                    " values, expected " + std::to_string(expected));
    }
    std::vector<double> values(expected);
    for (std::size_t i = 0; i < expected; ++i) {
        std::uint64_t word = 0;
        for (int b = 7; b >= 0; --b) {
            word = (word << 8) | bytes[i * 8 + static_cast<std::size_t>(b)];
        }
        values[i] = std::bit_cast<double>(word);
    }
    return values;
}

std::string encode_matrix(const Eigen::MatrixXd& m) {
    std::vector<double> row_major;
    row_major.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) row_major.push_back(m(r, c));
    }
    return encode_doubles(row_major);
}

Eigen::MatrixXd decode_matrix(const std::string& text, Eigen::Index rows, Eigen::Index cols) {
    const std::vector<double> values =
        decode_doubles(text, static_cast<std::size_t>(rows * cols));
    Eigen::MatrixXd m(rows, cols);
    std::size_t i = 0;
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = values[i++];
    }
    return m;
}

std::string encode_vector(const Eigen::VectorXd& v) {
    return encode_doubles(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

Eigen::VectorXd decode_vector(const std::string& text, Eigen::Index size) {
    const std::vector<double> values = decode_doubles(text, static_cast<std::size_t>(size));
    return Eigen::Map<const Eigen::VectorXd>(values.data(), size);
}

nlohmann::json gate_to_json(const GateWeights& gate) {
    return {{"input", encode_matrix(gate.input)},
            {"recurrent", encode_matrix(gate.recurrent)},
            {"bias", encode_vector(gate.bias)}};
}

GateWeights gate_from_json(const nlohmann::json& j, Eigen::Index hidden, Eigen::Index in_dim) {
    return GateWeights{decode_matrix(j.at("input").get<std::string>(), hidden, in_dim),
                       decode_matrix(j.at("recurrent").get<std::string>(), hidden, hidden),
                       decode_vector(j.at("bias").get<std::string>(), hidden)};
}

}  // namespace

void save_model(const std::filesystem::path& path, const ModelFile& model) {
    const ModelConfig& c = model.config;
    nlohmann::json j;
    j["format"] = kModelFormatTag;
    j["region"] = model.region;
    j["seed"] = c.seed;
    j["config"] = {{"lag_window", c.lag_window},
                   {"incubation_gap", c.incubation_gap},
                   {"mobility_dim", c.mobility_dim},
                   {"hidden", c.hidden},
                   {"learning_rate", c.learning_rate},
                   {"max_iterations", c.max_iterations},
                   {"tolerance", c.tolerance},
                   {"patience", c.patience},
                   {"seed", c.seed}};
    j["params"] = {
        {"base_raw", model.params.base.raw},
        {"lag_logits", encode_doubles(model.params.lags.logits)},
        {"lstm",
         {{"in_gate", gate_to_json(model.params.lstm.in_gate)},
          {"forget_gate", gate_to_json(model.params.lstm.forget_gate)},
          {"cell_gate", gate_to_json(model.params.lstm.cell_gate)},
          {"out_gate", gate_to_json(model.params.lstm.out_gate)}}},
        {"head_w", encode_vector(model.params.head.w)},
        {"head_b", model.params.head.b},
    };
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write model file " + path.string());
    }
    out << j.dump(2) << "\n";
}

ModelFile load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open model file " + path.string());
    }
    nlohmann::json j;
    in >> j;
    if (j.value("format", "") != kModelFormatTag) {
        throw std::runtime_error(path.string() + ": unsupported model format '" +
                                 j.value("format", "<missing>") + "'");
    }
    ModelFile model;
    model.region = j.value("region", "");
    const nlohmann::json& c = j.at("config");
    model.config.lag_window = c.at("lag_window").get<int>();
    model.config.incubation_gap = c.at("incubation_gap").get<int>();
    model.config.mobility_dim = c.at("mobility_dim").get<int>();
    model.config.hidden = c.at("hidden").get<int>();
    model.config.learning_rate = c.at("learning_rate").get<double>();
    model.config.max_iterations = c.at("max_iterations").get<int>();
    model.config.tolerance = c.at("tolerance").get<double>();
    model.config.patience = c.at("patience").get<int>();
    model.config.seed = c.at("seed").get<std::uint64_t>();
    model.config.validate();

    const auto hidden = static_cast<Eigen::Index>(model.config.hidden);
    const auto in_dim = static_cast<Eigen::Index>(model.config.mobility_dim + 1);
    const nlohmann::json& p = j.at("params");
    model.params.base.raw = p.at("base_raw").get<double>();
    model.params.lags.logits =
        decode_doubles(p.at("lag_logits").get<std::string>(),
                       static_cast<std::size_t>(model.config.lag_window));
    const nlohmann::json& lstm = p.at("lstm");
    model.params.lstm.in_gate = gate_from_json(lstm.at("in_gate"), hidden, in_dim);
    model.params.lstm.forget_gate = gate_from_json(lstm.at("forget_gate"), hidden, in_dim);
    model.params.lstm.cell_gate = gate_from_json(lstm.at("cell_gate"), hidden, in_dim);
    model.params.lstm.out_gate = gate_from_json(lstm.at("out_gate"), hidden, in_dim);
    model.params.head.w = decode_vector(p.at("head_w").get<std::string>(), hidden);
    model.params.head.b = p.at("head_b").get<double>();
    return model;
}

}  // namespace covihawkes
