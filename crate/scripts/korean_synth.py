"""Deterministic synthetic Korean text for tokenizer fixtures.

Sentences are assembled from small lexicons with batchim-aware particles and
a handful of verb and adjective paradigms. The output is grammatical enough
to have realistic syllable and morpheme statistics; it is not meant to read
naturally.
"""

import random

GENERAL_NOUNS = """
사람 학생 선생님 친구 가족 어머니 아버지 동생 아이 할머니 회사 학교 도서관 병원
시장 공원 식당 카페 집 방 도시 마을 나라 세계 정부 시민 주민 경제 사회 문화 역사
음식 음악 영화 책 신문 잡지 뉴스 날씨 계절 봄 여름 가을 겨울 아침 점심 저녁 주말
시간 오늘 내일 어제 문제 방법 결과 이유 생각 의견 계획 목표 경험 기억 이야기 질문
대답 소식 선물 여행 운동 취미 건강 마음 사랑 행복 희망 걱정 노력 성공 실패 변화
발전 환경 자연 바다 산 강 하늘 나무 꽃 동물 고양이 강아지 버스 지하철 자동차 기차
비행기 길 거리 건물 아파트 가게 물건 가격 돈 일 직장 회의 보고서 자료 정보 기술
인터넷 전화 컴퓨터 사진 편지 축제 행사 대회 경기 선수 팀 관객 시청자 독자 작가 기자
""".split()

STEM_NOUNS = """
함수 변수 방정식 행렬 벡터 미분 적분 극한 수열 급수 확률 통계 평균 분산 표준편차
가설 실험 측정 오차 데이터 모델 알고리즘 복잡도 그래프 노드 정점 간선 집합 원소
분자 원자 전자 양성자 중성자 에너지 질량 속도 가속도 힘 운동량 파동 주파수 진폭
온도 압력 부피 밀도 농도 반응 촉매 화합물 용액 세포 유전자 단백질 효소 염기서열
좌표 기울기 접선 곡선 넓이 부피 삼각형 원 반지름 지름 각도 비율 근사 수렴 발산
정리 증명 정의 조건 공식 계수 상수 차원 공간 고유값 고유벡터 행렬식 역행렬 전치
손실 학습 최적화 경사하강법 신경망 매개변수 정확도 재현율 표본 모집단 분포 신뢰구간
""".split()

# 하다 predicates: noun stems that take 하다.
HADA = """
공부 운동 준비 연구 발표 설명 분석 계산 측정 확인 정리 설계 개발 구현 검토 비교
사용 이용 생각 결정 선택 시작 완료 요청 제안 참여 노력 기대 걱정 이해 관찰 실험
정의 증명 추정 변환 적용 평가 요약 기록 소개 안내 조사 예측 관리 처리 저장 검증
""".split()

# Native verbs: (plain present, past, connective -고, -아서/어서, adnominal present, formal polite)
VERBS = [
    ("간다", "갔다", "가고", "가서", "가는", "갑니다"),
    ("온다", "왔다", "오고", "와서", "오는", "옵니다"),
    ("본다", "봤다", "보고", "봐서", "보는", "봅니다"),
    ("먹는다", "먹었다", "먹고", "먹어서", "먹는", "먹습니다"),
    ("읽는다", "읽었다", "읽고", "읽어서", "읽는", "읽습니다"),
    ("쓴다", "썼다", "쓰고", "써서", "쓰는", "씁니다"),
    ("만든다", "만들었다", "만들고", "만들어서", "만드는", "만듭니다"),
    ("듣는다", "들었다", "듣고", "들어서", "듣는", "듣습니다"),
    ("걷는다", "걸었다", "걷고", "걸어서", "걷는", "걷습니다"),
    ("산다", "살았다", "살고", "살아서", "사는", "삽니다"),
    ("배운다", "배웠다", "배우고", "배워서", "배우는", "배웁니다"),
    ("가르친다", "가르쳤다", "가르치고", "가르쳐서", "가르치는", "가르칩니다"),
    ("찾는다", "찾았다", "찾고", "찾아서", "찾는", "찾습니다"),
    ("만난다", "만났다", "만나고", "만나서", "만나는", "만납니다"),
    ("기다린다", "기다렸다", "기다리고", "기다려서", "기다리는", "기다립니다"),
    ("돕는다", "도왔다", "돕고", "도와서", "돕는", "돕습니다"),
    ("나눈다", "나눴다", "나누고", "나눠서", "나누는", "나눕니다"),
    ("얻는다", "얻었다", "얻고", "얻어서", "얻는", "얻습니다"),
    ("바꾼다", "바꿨다", "바꾸고", "바꿔서", "바꾸는", "바꿉니다"),
    ("남긴다", "남겼다", "남기고", "남겨서", "남기는", "남깁니다"),
]

# Adjectives: (plain, past, connective, adnominal, polite -요)
ADJECTIVES = [
    ("좋다", "좋았다", "좋고", "좋은", "좋아요"),
    ("크다", "컸다", "크고", "큰", "커요"),
    ("작다", "작았다", "작고", "작은", "작아요"),
    ("많다", "많았다", "많고", "많은", "많아요"),
    ("적다", "적었다", "적고", "적은", "적어요"),
    ("어렵다", "어려웠다", "어렵고", "어려운", "어려워요"),
    ("쉽다", "쉬웠다", "쉽고", "쉬운", "쉬워요"),
    ("중요하다", "중요했다", "중요하고", "중요한", "중요해요"),
    ("새롭다", "새로웠다", "새롭고", "새로운", "새로워요"),
    ("빠르다", "빨랐다", "빠르고", "빠른", "빨라요"),
    ("느리다", "느렸다", "느리고", "느린", "느려요"),
    ("따뜻하다", "따뜻했다", "따뜻하고", "따뜻한", "따뜻해요"),
    ("조용하다", "조용했다", "조용하고", "조용한", "조용해요"),
    ("복잡하다", "복잡했다", "복잡하고", "복잡한", "복잡해요"),
    ("간단하다", "간단했다", "간단하고", "간단한", "간단해요"),
    ("정확하다", "정확했다", "정확하고", "정확한", "정확해요"),
]

ADVERBS = """
매우 아주 정말 조금 자주 가끔 항상 이미 아직 다시 함께 먼저 나중에 특히 결국
갑자기 천천히 빨리 충분히 거의 모두 오히려 대체로 분명히
""".split()

TIMES = """
오늘 어제 내일 아침에 저녁에 주말에 지난주에 다음 달에 올해 작년에 최근에 요즘
""".split()

CONNECTIVES = ["그래서", "그러나", "하지만", "또한", "그리고", "따라서", "예를 들어", "반면에", "즉"]

ENGLISH_TERMS = [
    "eigenvalue", "gradient", "loss", "dataset", "batch", "kernel", "tensor", "matrix",
    "entropy", "variance", "regression", "token", "vector", "sample",
]

FORMULAS = [
    "f(x) = x^2 + 1", "y = ax + b", "E = mc^2", "a^2 + b^2 = c^2", "P(A|B)", "x_{n+1} = x_n - f(x_n)/f'(x_n)",
    "det(A) = 0", "Ax = b", "lim_{n->inf} 1/n = 0", "sum_{i=1}^{n} i = n(n+1)/2", "pH = -log[H+]",
]


def has_batchim(word):
    ch = word[-1]
    code = ord(ch) - 0xAC00
    if 0 <= code <= 11171:
        return code % 28 != 0
    return ch.isdigit() and ch in "0136789"


def rieul_batchim(word):
    code = ord(word[-1]) - 0xAC00
    return 0 <= code <= 11171 and code % 28 == 8


def particle(word, kind):
    b = has_batchim(word)
    table = {
        "topic": ("은", "는"),
        "subj": ("이", "가"),
        "obj": ("을", "를"),
        "and": ("과", "와"),
        "with": ("이랑", "랑"),
    }
    if kind == "dir":
        return word + ("으로" if b and not rieul_batchim(word) else "로")
    if kind in table:
        return word + table[kind][0 if b else 1]
    simple = {"loc": "에서", "at": "에", "of": "의", "too": "도", "only": "만", "from": "부터", "to": "까지"}
    return word + simple[kind]


def hada(stem, form):
    return stem + {
        "plain": "한다", "past": "했다", "conn": "하고", "seq": "해서", "adn": "하는",
        "formal": "합니다", "formal_past": "했습니다", "cond": "하면", "can": "할 수 있다",
        "polite": "해요", "polite_past": "했어요", "want": "하고 싶다", "must": "해야 한다",
    }[form]


class Generator:
    def __init__(self, seed):
        self.r = random.Random(seed)

    def pick(self, xs):
        return self.r.choice(xs)

    def number(self):
        r = self.r.random()
        if r < 0.4:
            return str(self.r.randint(2, 99))
        if r < 0.7:
            return str(self.r.randint(100, 9999))
        return f"{self.r.randint(0, 99)}.{self.r.randint(0, 99)}"

    def verb(self, ending):
        if self.r.random() < 0.55:
            form = {"plain": "plain", "past": "past", "formal": self.pick(["formal", "formal_past"]),
                    "polite": self.pick(["polite", "polite_past"])}[ending]
            return hada(self.pick(HADA), form)
        v = self.pick(VERBS)
        if ending == "polite":
            return v[5]
        return {"plain": v[0], "past": v[1], "formal": v[5]}[ending]

    def general_sentence(self, nouns):
        ending = self.pick(["plain", "past", "formal", "formal", "polite"])
        n = lambda: self.pick(nouns)
        kind = self.r.randrange(9)
        if kind == 0:
            s = f"{self.pick(TIMES)} {particle(n(), 'topic')} {particle(n(), 'loc')} {particle(n(), 'obj')} {self.verb(ending)}"
        elif kind == 1:
            adj = self.pick(ADJECTIVES)
            end = {"plain": adj[0], "past": adj[1], "formal": adj[0][:-1] + "습니다" if has_batchim(adj[0][:-1]) else adj[0][:-1] + "ㅂ니다", "polite": adj[4]}[ending]
            if end.endswith("ㅂ니다"):
                end = adj[4][:-1] + "요"
            s = f"{particle(n(), 'of')} {particle(n(), 'subj')} {self.pick(ADVERBS)} {end}"
        elif kind == 2:
            s = f"{self.pick(ADVERBS)} {particle(n(), 'and')} {particle(n(), 'obj')} {self.verb(ending)}"
        elif kind == 3:
            s = f"{self.number()}명의 {particle(n(), 'subj')} {particle(n(), 'at')} {self.verb(ending)}"
        elif kind == 4:
            adj = self.pick(ADJECTIVES)
            s = f"{adj[3]} {particle(n(), 'obj')} {hada(self.pick(HADA), 'conn')} {particle(n(), 'dir')} {self.verb(ending)}"
        elif kind == 5:
            s = f"{self.pick(CONNECTIVES)} {particle(n(), 'topic')} {particle(n(), 'of')} {particle(n(), 'obj')} {hada(self.pick(HADA), 'must')}"
        elif kind == 6:
            v = self.pick(VERBS)
            s = f"{particle(n(), 'from')} {particle(n(), 'to')} {v[2]} {particle(n(), 'obj')} {self.verb(ending)}"
        elif kind == 7:
            s = f"{particle(n(), 'topic')} {self.number()}년 {particle(n(), 'loc')} {hada(self.pick(HADA), 'adn')} {particle(n(), 'subj')} {self.pick(ADJECTIVES)[1]}"
        else:
            v = self.pick(VERBS)
            s = f"{particle(n(), 'subj')} {v[3]} {particle(n(), 'too')} {hada(self.pick(HADA), self.pick(['can', 'want', 'cond']))}"
        if s.endswith("하면"):
            s += " " + self.verb(ending)
        return s + self.pick([".", ".", ".", ".", "!", "?"] if kind != 5 else ["."])

    def stem_sentence(self):
        r = self.r.random()
        if r < 0.2:
            s = f"{particle(self.pick(STEM_NOUNS), 'topic')} {self.pick(FORMULAS)} {particle('식', 'dir')} {hada('정의', 'plain')[:-2]}된다."
        elif r < 0.35:
            term = self.pick(STEM_NOUNS)
            s = f"{term}({self.pick(ENGLISH_TERMS)}){particle(term, 'topic')[len(term):]} {particle(self.pick(STEM_NOUNS), 'of')} {particle(self.pick(STEM_NOUNS), 'obj')} {hada(self.pick(HADA), self.pick(['plain', 'formal']))}."
        elif r < 0.5:
            s = f"{particle(self.pick(STEM_NOUNS), 'of')} 값은 {self.number()}이며, {particle(self.pick(STEM_NOUNS), 'topic')} {self.number()}{self.pick(['%', 'K', 'kg', 'm/s', 'mol'])}였다."
        else:
            s = self.general_sentence(STEM_NOUNS + GENERAL_NOUNS[:30])
        return s

    def document(self, stem=False):
        k = self.r.randint(3, 9)
        sents = [self.stem_sentence() if stem else self.general_sentence(GENERAL_NOUNS) for _ in range(k)]
        if self.r.random() < 0.3:
            cut = self.r.randint(1, k - 1)
            return " ".join(sents[:cut]) + "\n\n" + " ".join(sents[cut:])
        return " ".join(sents)


if __name__ == "__main__":
    g = Generator(0)
    for _ in range(3):
        print(g.document())
        print("--")
        print(g.document(stem=True))
        print("==")
