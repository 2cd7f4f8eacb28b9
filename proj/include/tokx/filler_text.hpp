#pragma once

#include <array>
#include <string_view>

namespace tokx::bench {

enum class FillerLang { English, Chinese };

// Content-free declarative sentences. The distractor text carries no
// retrievable information, so task difficulty is purely positional.
inline constexpr std::array<std::string_view, 40> kFillerEn = {
    "The sky above the harbor turned a pale shade of grey before noon.",
    "A light breeze moved through the gardens along the southern wall.",
    "The library reading room stayed quiet for most of the afternoon.",
    "Fresh bread was set out on the long wooden table by the window.",
    "The morning train left the station exactly on schedule again.",
    "Rain fell gently on the tiled roofs of the old town district.",
    "Several small boats drifted slowly across the calm bay water.",
    "The clock tower bell rang twice and then the square fell silent.",
    "Rows of lanterns lined the walkway leading up to the main gate.",
    "The museum opened its doors as the first visitors arrived.",
    "A delivery van stopped briefly outside the corner bookshop.",
    "The hillside orchard was full of ripening fruit this season.",
    "Workers repainted the railing along the riverside promenade.",
    "The evening market offered vegetables from the nearby farms.",
    "Students crossed the courtyard on their way to the lecture hall.",
    "The ferry horn sounded once as it approached the landing.",
    "Maps of the region hung on the wall beside the information desk.",
    "The bakery on the main street sold out of pastries by midday.",
    "A flock of birds circled the field twice before settling down.",
    "The caretaker swept fallen leaves from the museum steps.",
    "Soft music played from a radio in the back of the repair shop.",
    "The bridge over the canal was rebuilt many decades ago.",
    "Afternoon light came through the tall windows of the atrium.",
    "The weather report promised clear skies for the coming days.",
    "A long queue formed outside the theater before the matinee.",
    "The greenhouse kept its warmth well into the cold evening.",
    "Old photographs of the village hung along the staircase wall.",
    "The fountain in the plaza was turned off for the winter months.",
    "Cyclists followed the marked path that runs beside the river.",
    "The night shift ended quietly and the floor lights dimmed.",
    "Boxes of archived records filled the shelves of the basement.",
    "The lighthouse beam swept across the water at regular intervals.",
    "A gardener trimmed the hedges around the memorial garden.",
    "The committee meeting was moved to the larger conference room.",
    "Fresh snow covered the rooftops of the houses near the pass.",
    "The printing press in the workshop dates back a full century.",
    "Visitors left their umbrellas in the stand beside the entrance.",
    "The harvest festival drew crowds from the surrounding villages.",
    "A new timetable was posted on the board outside the depot.",
    "The observatory dome opened slowly under the clear night sky.",
};

inline constexpr std::array<std::string_view, 40> kFillerZh = {
    "清晨的陽光灑在安靜的街道上，行人緩緩走過。",
    "圖書館的閱覽室整個下午都保持著安靜的氣氛。",
    "港口邊的燈塔在夜裡規律地閃爍著光芒。",
    "市場裡的攤販一早就擺好了新鮮的蔬菜水果。",
    "火車準時離開車站，月台上只剩下幾位旅客。",
    "山坡上的果園今年結滿了成熟的果實。",
    "廣場中央的噴泉在冬季暫停了運作。",
    "博物館的大門隨著第一批訪客的到來而敞開。",
    "河邊的步道旁新漆了一排木製的欄杆。",
    "老街的麵包店在中午之前就賣完了所有糕點。",
    "學生們穿過中庭，走向遠處的演講廳。",
    "渡輪靠岸時鳴了一聲長長的汽笛。",
    "傍晚的市集販售著附近農家的自產蔬菜。",
    "一群候鳥在田野上空盤旋了兩圈才落下。",
    "管理員把博物館台階上的落葉掃得乾乾淨淨。",
    "修車行的收音機播放著輕柔的音樂。",
    "運河上的舊橋在數十年前重建過一次。",
    "午後的光線穿過中庭高大的玻璃窗。",
    "氣象報告預測未來幾天都是晴朗的好天氣。",
    "戲院門口在午場開演前排起了長長的隊伍。",
    "溫室在寒冷的夜裡依然保持著溫暖。",
    "樓梯間的牆上掛著村莊的老照片。",
    "自行車騎士沿著河邊的標線車道前進。",
    "夜班安靜地結束，樓層的燈光漸漸暗下。",
    "地下室的架子上堆滿了歸檔的舊紀錄。",
    "園丁修剪著紀念花園四周的樹籬。",
    "委員會的會議改到了較大的會議室舉行。",
    "新下的雪覆蓋了山口附近房屋的屋頂。",
    "工作坊裡的印刷機已有整整一百年的歷史。",
    "訪客把雨傘留在入口旁的傘架上。",
    "豐收祭典吸引了鄰近村落的大批人潮。",
    "車站外的公告欄貼出了新的時刻表。",
    "天文台的圓頂在晴朗的夜空下緩緩開啟。",
    "清澈的溪水從山谷間靜靜地流過。",
    "郵差在巷口把信件一一放進信箱。",
    "茶館的老闆燒好了今天的第一壺熱水。",
    "碼頭邊的小船隨著潮水輕輕搖晃。",
    "公園的長椅上坐著幾位下棋的老人。",
    "麵攤的蒸氣在冷空氣中緩緩升起。",
    "遠方的山脈在薄霧中顯得格外柔和。",
};

} // namespace tokx::bench
