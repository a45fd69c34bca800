// Command-line front end: analyze | embed | extract | verify | sweep.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include "scalesteg/error.hpp"
#include "scalesteg/pipeline.hpp"

using namespace scalesteg;

namespace {

struct ChannelArgs {
    std::string family = "bilinear";
    bool antialias = false;
    double sf = 0.5;
    double bicubic_a = -0.5;
    std::string cost = "hill-plain";
    int interval = 0;
    std::uint64_t seed = 1;
    double payload = 0.05;

    void add_to(CLI::App* cmd, bool with_payload) {
        cmd->add_option("--channel", family, "Kernel family")
            ->check(CLI::IsMember({"nearest", "bilinear", "bicubic"}));
        cmd->add_flag("--antialias", antialias, "Use the anti-aliasing kernel");
        cmd->add_option("--sf", sf, "Scaling factor in (0,1]");
        cmd->add_option("--bicubic-a", bicubic_a, "Bicubic kernel parameter");
        cmd->add_option("--cost", cost, "Cost variant: {hill,suniward}-{plain,pro}");
        cmd->add_option("--interval", interval, "Sampling interval override (0 = channel default)");
        cmd->add_option("--seed", seed, "Key seed");
        if (with_payload) cmd->add_option("--payload", payload, "Payload in bits per scaled-image pixel");
    }

    RunConfig config() const {
        RunConfig c;
        c.channel = ChannelSpec{parse_family(family), antialias, sf, bicubic_a};
        parse_cost_variant(cost, c.base, c.assembly);
        if (interval > 0) c.override_s = interval;
        c.seed = seed;
        c.payload = payload;
        c.validate();
        return c;
    }
};

std::vector<std::uint8_t> read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
    } else {
        write_text(path, text);
    }
}

std::vector<std::string> split(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Steganography that survives known image downscaling channels"};
    app.require_subcommand(1);

    ChannelArgs an;
    std::string an_cover, an_out, an_plan, an_costs;
    auto* analyze_cmd = app.add_subcommand("analyze", "Report channel geometry, capacity and wet sites");
    analyze_cmd->add_option("--cover", an_cover, "Cover image (PGM/PNG)")->required();
    an.add_to(analyze_cmd, false);
    analyze_cmd->add_option("--out", an_out, "Report JSON path (default stdout)");
    analyze_cmd->add_option("--plan", an_plan, "Write the full embedding plan as JSON");
    analyze_cmd->add_option("--costs", an_costs, "Write per-site costs (.csv or .json)");

    ChannelArgs em;
    std::string em_cover, em_message, em_out, em_key, em_delta, em_scaled;
    auto* embed_cmd = app.add_subcommand("embed", "Embed a message and write the proxy stego");
    embed_cmd->add_option("--cover", em_cover, "Cover image")->required();
    embed_cmd->add_option("--message", em_message, "Message file (bytes)")->required();
    embed_cmd->add_option("--out", em_out, "Proxy stego output path")->required();
    embed_cmd->add_option("--key", em_key, "Stego key output path (JSON)")->required();
    embed_cmd->add_option("--emit-delta", em_delta, "Write the cover perturbation as JSON");
    embed_cmd->add_option("--scaled-out", em_scaled, "Write the expected scaled stego");
    em.add_to(embed_cmd, false);

    std::string ex_stego, ex_key, ex_out;
    bool ex_proxy = false;
    auto* extract_cmd = app.add_subcommand("extract", "Recover a message from a scaled stego image");
    extract_cmd->add_option("--stego", ex_stego, "Scaled stego image")->required();
    extract_cmd->add_option("--key", ex_key, "Stego key (JSON)")->required();
    extract_cmd->add_option("--out", ex_out, "Output path for the message (default stdout)");
    extract_cmd->add_flag("--from-proxy", ex_proxy, "Input is the proxy stego; apply the key's channel first");

    ChannelArgs ve;
    std::string ve_cover, ve_message, ve_out;
    auto* verify_cmd = app.add_subcommand("verify", "Embed, resize through the real channel, extract and audit");
    verify_cmd->add_option("--cover", ve_cover, "Cover image")->required();
    verify_cmd->add_option("--message", ve_message, "Message file (default: random bytes at --payload)");
    verify_cmd->add_option("--out", ve_out, "Report JSON path (default stdout)");
    ve.add_to(verify_cmd, true);

    std::string sw_dir, sw_channels = "nearest,bilinear,bicubic,aa-bilinear,aa-bicubic", sw_sfs = "0.3,0.5,0.7",
                sw_costs = "hill-plain", sw_out;
    double sw_payload = 0.05;
    std::uint64_t sw_seed = 1;
    int sw_interval = 0;
    bool sw_no_timing = false;
    auto* sweep_cmd = app.add_subcommand("sweep", "Verify a grid of channels and costs over a cover directory");
    sweep_cmd->add_option("--covers", sw_dir, "Directory of covers")->required();
    sweep_cmd->add_option("--channels", sw_channels, "Comma list: nearest,bilinear,bicubic,aa-bilinear,aa-bicubic");
    sweep_cmd->add_option("--sfs", sw_sfs, "Comma list of scaling factors");
    sweep_cmd->add_option("--costs", sw_costs, "Comma list of cost variants");
    sweep_cmd->add_option("--payload", sw_payload, "Payload in bits per scaled-image pixel");
    sweep_cmd->add_option("--seed", sw_seed, "Key and message seed");
    sweep_cmd->add_option("--interval", sw_interval, "Sampling interval override");
    sweep_cmd->add_option("--out", sw_out, "CSV path (default stdout)");
    sweep_cmd->add_flag("--no-timing", sw_no_timing, "Write zero runtimes for byte-stable output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*analyze_cmd) {
            const RunConfig config = an.config();
            const PixelGrid cover = load_image(an_cover);
            emit(an_out, analyze(cover, config).dump(2) + "\n");
            if (!an_plan.empty() || !an_costs.empty()) {
                PlanOptions options;
                options.override_s = config.override_s;
                const EmbedPlan plan = build_embed_plan(cover, config.channel, options);
                if (!an_plan.empty()) write_text(an_plan, to_json(plan).dump(1) + "\n");
                if (!an_costs.empty()) {
                    const CostMap costs = assemble_costs(plan, cover, resize(cover, plan.resize), config);
                    const bool csv = an_costs.size() >= 4 && an_costs.substr(an_costs.size() - 4) == ".csv";
                    write_text(an_costs, csv ? costs_to_csv(costs, plan) : to_json(costs, plan).dump(1) + "\n");
                }
            }
        } else if (*embed_cmd) {
            const RunConfig config = em.config();
            const PixelGrid cover = load_image(em_cover);
            const auto message = read_bytes(em_message);
            const EmbedOutcome out = embed_message_into(cover, message, config);
            save_image(out.proxy, em_out);
            write_text(em_key, to_json(out.key).dump(2) + "\n");
            if (!em_delta.empty()) write_text(em_delta, to_json(out.delta).dump(1) + "\n");
            if (!em_scaled.empty()) save_image(out.scaled_stego, em_scaled);
            const Json summary{{"capacity_bits", out.plan.capacity_bits},
                               {"message_capacity_bytes", message_capacity_bytes(out.key)},
                               {"used_bits", out.message_bits},
                               {"changed_sites", out.changes.changed_count()},
                               {"changed_pixels", out.delta.nonzero_count()},
                               {"l1_distortion", out.delta.l1_norm()},
                               {"wet_retries", out.wet_retries}};
            std::cout << summary.dump(2) << "\n";
        } else if (*extract_cmd) {
            const StegoKey key = key_from_json(read_json(ex_key));
            PixelGrid stego = load_image(ex_stego);
            if (ex_proxy) stego = resize(stego, key.channel);
            const auto message = extract_message(stego, key);
            if (ex_out.empty() || ex_out == "-") {
                std::cout.write(reinterpret_cast<const char*>(message.data()), static_cast<std::streamsize>(message.size()));
            } else {
                write_text(ex_out, std::string(message.begin(), message.end()));
            }
        } else if (*verify_cmd) {
            const RunConfig config = ve.config();
            const PixelGrid cover = load_image(ve_cover);
            const auto message = ve_message.empty()
                                     ? random_bytes(payload_bits_for(config, cover.height(), cover.width()) / 8, config.seed)
                                     : read_bytes(ve_message);
            VerifyReport report = verify_message(cover, message, config);
            report.image = ve_cover;
            emit(ve_out, to_json(report).dump(2) + "\n");
            if (!report.error.empty()) {
                const bool infeasible = report.error.rfind("infeasible", 0) == 0;
                return infeasible ? exit_code_for(ErrorCode::infeasible) : exit_code_for(ErrorCode::solver_failure);
            }
            return report.clean() ? 0 : exit_code_for(ErrorCode::solver_failure);
        } else if (*sweep_cmd) {
            SweepGrid grid;
            grid.payload = sw_payload;
            grid.seed = sw_seed;
            if (sw_interval > 0) grid.override_s = sw_interval;
            for (const auto& sf_text : split(sw_sfs)) {
                double sf = 0.0;
                try {
                    sf = std::stod(sf_text);
                } catch (const std::exception&) {
                    throw Error(ErrorCode::invalid_argument, "bad scaling factor: " + sf_text);
                }
                for (const auto& name : split(sw_channels)) {
                    ChannelSpec spec;
                    parse_channel_name(name, spec.family, spec.antialiasing);
                    spec.sf = sf;
                    spec.validate();
                    grid.channels.push_back(spec);
                }
            }
            for (const auto& name : split(sw_costs)) {
                BaseCost base;
                Assembly assembly;
                parse_cost_variant(name, base, assembly);
                grid.costs.emplace_back(base, assembly);
            }
            emit(sw_out, sweep(sw_dir, grid, worker_count(), !sw_no_timing));
        }
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
