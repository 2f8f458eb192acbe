from reader_service.vocab import (BOS, EOS, PAD, PASSAGE_MODE, QUESTION_MODE,
                                  UNK, Vocab, tokenize)


def test_special_token_ids():
    vocab = Vocab.build(["alpha beta"])
    assert vocab.itos[PAD] == "<pad>"
    assert vocab.itos[BOS] == "<bos>"
    assert vocab.itos[EOS] == "<eos>"
    assert vocab.itos[UNK] == "<unk>"
    assert vocab.itos[PASSAGE_MODE] == "<passage>"
    assert vocab.itos[QUESTION_MODE] == "<question>"


def test_tokenize_splits_brackets():
    assert tokenize("(AND cls (JOIN rel [ Some Name ]))") == [
        "(", "AND", "cls", "(", "JOIN", "rel", "[", "Some", "Name", "]",
        ")", ")"]


def test_encode_decode_roundtrip():
    text = "(AND cvg.computer_game_engine (JOIN dev [ Company 3 ]))"
    vocab = Vocab.build([text])
    assert vocab.decode(vocab.encode(text)) == " ".join(tokenize(text))


def test_unknown_tokens_map_to_unk():
    vocab = Vocab.build(["alpha"])
    assert vocab.encode("alpha omega") == [vocab.stoi["alpha"], UNK]


def test_decode_stops_at_eos_and_skips_padding():
    vocab = Vocab.build(["alpha beta"])
    ids = [BOS, vocab.stoi["alpha"], PAD, vocab.stoi["beta"], EOS,
           vocab.stoi["alpha"]]
    assert vocab.decode(ids) == "alpha beta"
