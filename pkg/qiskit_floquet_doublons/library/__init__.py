# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.
"""
Floquet Lattice Library.
"""
from .single_particle import (
    floquet_operator,
    bloch_floquet_operator,
    quasienergies,
    cylinder_spectrum,
    chern_number,
    evolve_single_particle,
)
from .two_particle import (
    TwoParticleBasis,
    DecouplingSolution,
    pair_block,
    decoupling_ratio,
    effective_parameters,
    decoupling_table,
    two_particle_floquet,
)
from .dynamics import Trajectory, doublon_state, evolve
from .stability import (
    decay_probability,
    invert_theta_prime,
    sweep_pdec,
    tune_interactions,
)
from .oracles import run_validation
from .experiments import (
    SpectrumWorkflow,
    ChernWorkflow,
    DecoupleWorkflow,
    EvolveWorkflow,
    StabilityWorkflow,
    ValidateWorkflow,
    run_workflow,
)
