"""Feed-forward NEAT: genomes with innovation numbers, speciation and
generational evolution from perceptron-like starting networks."""

from .genome import (
    Activation,
    CompiledNetwork,
    ConnectionGene,
    CycleError,
    Genome,
    InnovationRegistry,
    NodeGene,
    NodeKind,
    activate,
    activate_batch,
    add_connection,
    add_node,
    check_genome,
    compatibility_distance,
    compile_genome,
    creates_cycle,
    crossover,
    has_input_output_path,
    legal_new_connections,
    mutate,
    perceptron,
    perturb_weights,
    steep_sigmoid,
    topological_order,
)
from .population import (
    EvolutionParams,
    EvolutionResult,
    Population,
    Species,
    allocate_offspring,
    evolve_generation,
    init_population,
    run_evolution,
    speciate,
)

__all__ = [
    "Activation",
    "CompiledNetwork",
    "ConnectionGene",
    "CycleError",
    "EvolutionParams",
    "EvolutionResult",
    "Genome",
    "InnovationRegistry",
    "NodeGene",
    "NodeKind",
    "Population",
    "Species",
    "activate",
    "activate_batch",
    "add_connection",
    "add_node",
    "allocate_offspring",
    "check_genome",
    "compatibility_distance",
    "compile_genome",
    "creates_cycle",
    "crossover",
    "evolve_generation",
    "has_input_output_path",
    "init_population",
    "legal_new_connections",
    "mutate",
    "perceptron",
    "perturb_weights",
    "run_evolution",
    "speciate",
    "steep_sigmoid",
    "topological_order",
]
