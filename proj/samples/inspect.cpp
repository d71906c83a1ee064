// Prints the disassembly, basic blocks and vulnerability fragments of a hex
// bytecode string, without any trained model.
//
//   inspect 0x6001600201ff
//   inspect --file contract.hex

#include "evmscan/evmscan.hpp"

#include <cstring>
#include <iostream>

int main(int argc, char** argv)
{
    if (argc < 2)
    {
        std::cerr << "usage: inspect <hex> | inspect --file <path>\n";
        return 1;
    }
    try
    {
        const auto code = (argc >= 3 && std::strcmp(argv[1], "--file") == 0)
                              ? evmscan::read_bytecode(argv[2])
                              : evmscan::parse_hex(argv[1], "argv");
        const auto stream = evmscan::disassemble(code);
        const auto cfg = evmscan::build_cfg(stream);

        std::cout << evmscan::format_listing(stream) << '\n';
        for (const auto& b : cfg.blocks)
        {
            std::cout << "block " << b.id << " pc " << b.start_pc << ".." << b.end_pc << " ends with "
                      << evmscan::to_string(b.terminator) << '\n';
        }
        for (const auto& e : cfg.edges)
            std::cout << "  " << e.from << " -> " << e.to << " (" << evmscan::to_string(e.kind) << ")\n";
        if (!cfg.unresolved_jumps.empty())
            std::cout << cfg.unresolved_jumps.size() << " unresolved jump(s)\n";

        for (const auto& frags : evmscan::extract_all_fragments(cfg))
        {
            for (const auto& f : frags)
                std::cout << evmscan::format_fragment_record("argv", f, 64) << '\n';
        }
    }
    catch (const evmscan::Error& e)
    {
        std::cerr << e.what() << '\n';
        return 1;
    }
    return 0;
}
