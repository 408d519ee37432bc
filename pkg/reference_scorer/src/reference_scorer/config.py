import json
from dataclasses import asdict, dataclass
from pathlib import Path

CONFIG_FILE = "scorer_config.json"


@dataclass
class ScorerConfig:
    """Fine-tuning hyperparameters.

    Defaults follow the standard fine-tuning recipe for base-size
    uncased bidirectional encoders; 6 epochs because longer schedules
    overfit this task.
    """

    model_name: str = "bert-base-uncased"
    max_length: int = 128
    epochs: int = 6
    learning_rate: float = 2e-5
    seed: int = 42
    batch_size: int = 16
    device: str = "auto"

    def save(self, directory: str | Path) -> None:
        path = Path(directory) / CONFIG_FILE
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")

    @classmethod
    def load(cls, directory: str | Path) -> "ScorerConfig":
        path = Path(directory) / CONFIG_FILE
        return cls(**json.loads(path.read_text(encoding="utf-8")))


def resolve_device(spec: str) -> str:
    if spec != "auto":
        return spec
    import torch

    return "cuda" if torch.cuda.is_available() else "cpu"
