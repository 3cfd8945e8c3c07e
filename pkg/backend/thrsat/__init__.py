"""thrsat：有界寬度 CNF 的門檻計數判定（THR(ρ)-kSAT）函式庫與命令列工具。"""

__version__ = "0.1.0"
