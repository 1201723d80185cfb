#include "cycnn/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

namespace cycnn {

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
    std::string tok;
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') {}
            continue;
        }
        if (!std::isspace(ch)) {
            tok.push_back(static_cast<char>(ch));
            while ((ch = in.get()) != EOF && !std::isspace(ch)) tok.push_back(static_cast<char>(ch));
            break;
        }
    }
    if (tok.empty()) throw std::runtime_error("pnm: truncated header");
    return tok;
}

}  // namespace

ImageGrid load_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("pnm: cannot open " + path);
    const std::string magic = next_token(in);
    int channels;
    if (magic == "P5")
        channels = 1;
    else if (magic == "P6")
        channels = 3;
    else
        throw std::runtime_error("pnm: unsupported magic '" + magic + "' in " + path);
    const int width = std::stoi(next_token(in));
    const int height = std::stoi(next_token(in));
    const int maxval = std::stoi(next_token(in));
    if (width < 1 || height < 1) throw std::runtime_error("pnm: bad dimensions in " + path);
    if (maxval != 255) throw std::runtime_error("pnm: only 8-bit images supported: " + path);

    std::vector<unsigned char> raw(static_cast<size_t>(width) * height * channels);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<size_t>(in.gcount()) != raw.size())
        throw std::runtime_error("pnm: truncated pixel data in " + path);

    ImageGrid img(channels, height, width);
    // File is pixel-interleaved; ImageGrid is channel-major.
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            for (int c = 0; c < channels; ++c)
                img.at(c, y, x) = raw[(static_cast<size_t>(y) * width + x) * channels + c] / 255.0f;
    return img;
}

void save_pnm(const ImageGrid& img, const std::string& path) {
    if (img.channels != 1 && img.channels != 3)
        throw std::runtime_error("pnm: only 1- or 3-channel images can be saved");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("pnm: cannot write " + path);
    out << (img.channels == 1 ? "P5" : "P6") << "\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> raw(static_cast<size_t>(img.width) * img.height * img.channels);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) {
                const float v = std::clamp(img.at(c, y, x), 0.0f, 1.0f);
                raw[(static_cast<size_t>(y) * img.width + x) * img.channels + c] =
                    static_cast<unsigned char>(v * 255.0f + 0.5f);
            }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw std::runtime_error("pnm: write failed for " + path);
}

}  // namespace cycnn
