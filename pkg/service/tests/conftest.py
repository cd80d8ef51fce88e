import pytest
import torch
from fastapi.testclient import TestClient
from transformers import BertConfig, BertForMaskedLM, BertTokenizer

from mlm_service.app import ServiceConfig, create_app

TINY_VOCAB = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "苹", "果", "梨", "桃", "电", "脑", "甜", "好", "吃", "水",
    "的", "是", "很", "这", "个",
    "fruit", "##cake", "machine", "sweet", "the", "is",
]


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    """A small randomly initialized fill-mask model saved to disk, so the
    service exercises the real load/tokenize/forward path offline."""
    path = tmp_path_factory.mktemp("tiny-mlm")
    tokenizer = BertTokenizer(vocab={t: i for i, t in enumerate(TINY_VOCAB)})
    torch.manual_seed(1234)
    config = BertConfig(
        vocab_size=len(TINY_VOCAB), hidden_size=32, num_hidden_layers=2,
        num_attention_heads=2, intermediate_size=64,
        max_position_embeddings=48,
    )
    model = BertForMaskedLM(config)
    model.eval()
    tokenizer.save_pretrained(path)
    model.save_pretrained(path)
    return str(path)


@pytest.fixture(scope="session")
def service_config(tiny_model_dir):
    return ServiceConfig(model_id=tiny_model_dir, max_batch=16)


@pytest.fixture(scope="session")
def app(service_config):
    return create_app(service_config)


@pytest.fixture
def client(app):
    return TestClient(app)
