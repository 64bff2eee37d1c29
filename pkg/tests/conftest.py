import pytest
import torch

# Small tensors dispatch faster on one thread, and single-threaded execution
# is what the determinism contract is stated against.
torch.set_num_threads(1)


@pytest.fixture
def gen():
    def make(seed=0):
        g = torch.Generator()
        g.manual_seed(seed)
        return g
    return make
